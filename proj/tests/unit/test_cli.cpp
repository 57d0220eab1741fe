#include <pwab/align.hpp>
#include <pwab/cli.hpp>
#include <pwab/corpus.hpp>
#include <pwab/jsonl.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace pwab;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "pwab");
    return cli::run(args);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, HelpAndUnknownSubcommand) {
    EXPECT_EQ(run({"--help"}), 0);
    EXPECT_NE(run({"frobnicate"}), 0);
    EXPECT_NE(run({}), 0);
}

TEST(Cli, Sha256KnownVectors) {
    EXPECT_EQ(cli::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, FixtureIsDeterministicAndLoadable) {
    test::TempDir a, b;
    ASSERT_EQ(run({"fixture", "--seed", "3", "--out", a.path().string()}), 0);
    ASSERT_EQ(run({"fixture", "--seed", "3", "--out", b.path().string()}), 0);
    for (const auto& name : {"catalog.jsonl", "users.jsonl", "instructions.jsonl", "manifest.json"}) {
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    }
    const auto bundle = corpus::load_bundle(a.path());
    EXPECT_EQ(bundle, corpus::generate_fixture(3, 10, 50));
}

TEST(Cli, SeedIsRequired) {
    test::TempDir d;
    EXPECT_EQ(run({"fixture", "--out", d.path().string()}), 1);
}

TEST(Cli, EvalOracleIsByteIdenticalAndManifestHashesMatch) {
    test::TempDir a, b;
    for (const auto* dir : {&a, &b}) {
        ASSERT_EQ(run({"eval-single", "--dataset", "fixture", "--seed", "7", "--scripted", "oracle", "--out",
                       dir->path().string()}),
                  0);
    }
    EXPECT_EQ(slurp(a / "episodes.jsonl"), slurp(b / "episodes.jsonl"));
    EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    EXPECT_EQ(manifest.at("command"), "eval-single");
    for (const auto& [name, hash] : manifest.at("outputs").items()) {
        EXPECT_EQ(hash.get<std::string>(), cli::sha256_hex(slurp(a / name))) << name;
    }
    const auto report = nlohmann::json::parse(slurp(a / "report.json"));
    EXPECT_EQ(report.at("per_kind").at("search").at("function_acc"), 1.0);
}

TEST(Cli, OptionValidation) {
    test::TempDir d;
    const auto out = d.path().string();
    EXPECT_NE(run({"eval-single", "--dataset", "fixture", "--seed", "1", "--scripted", "oracle", "--budget", "300",
                   "--out", out}),
              0);
    EXPECT_EQ(run({"eval-single", "--dataset", "fixture", "--seed", "1", "--scripted", "oracle", "--track", "multi",
                   "--out", out}),
              1);
    EXPECT_EQ(run({"eval-single", "--dataset", "fixture", "--seed", "1", "--out", out}), 1);
    EXPECT_NE(run({"eval-multi", "--dataset", "fixture", "--seed", "1", "--scripted", "oracle", "--memory", "all",
                   "--out", out}),
              0);
}

TEST(Cli, MultiTurnAndReport) {
    test::TempDir run_dir, rep;
    ASSERT_EQ(run({"eval-multi", "--dataset", "fixture", "--seed", "7", "--scripted", "heuristic", "--memory", "puma",
                   "--jobs", "4", "--out", run_dir.path().string()}),
              0);
    const auto episodes = jsonl::read_all(run_dir / "episodes.jsonl");
    ASSERT_FALSE(episodes.empty());
    for (const auto& e : episodes) {
        EXPECT_GE(e.at("steps").get<int>(), 1);
        EXPECT_LE(e.at("steps").get<int>(), 10);
    }
    ASSERT_EQ(run({"report", run_dir.path().string(), "--out", rep.path().string()}), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(rep / "report.json")), nlohmann::json::parse(slurp(run_dir / "report.json")));
}

TEST(Cli, BuildAlignOracleExportsValidPairs) {
    test::TempDir d;
    ASSERT_EQ(run({"build-align", "--dataset", "fixture", "--seed", "7", "--scripted", "oracle", "--out",
                   d.path().string()}),
              0);
    const auto sft = align::read_sft(d / "sft.jsonl");
    EXPECT_FALSE(sft.empty());
    for (const auto& p : align::read_preferences(d / "preference.jsonl")) EXPECT_GT(p.score_best, p.score_worst);
}

TEST(Cli, IndexAndTrainRec) {
    test::TempDir d;
    ASSERT_EQ(run({"index", "--dataset", "fixture", "--seed", "7", "--out", d.path().string()}), 0);
    ASSERT_EQ(run({"train-rec", "--dataset", "fixture", "--seed", "7", "--out", d.path().string()}), 0);
    EXPECT_TRUE(std::filesystem::exists(d / "index.json"));
    EXPECT_TRUE(std::filesystem::exists(d / "cooc.json"));
}

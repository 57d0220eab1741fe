#include <pwab/align.hpp>
#include <pwab/benchgen.hpp>
#include <pwab/cli.hpp>
#include <pwab/eval.hpp>
#include <pwab/jsonl.hpp>
#include <pwab/scripted.hpp>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace pwab::cli {

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string dataset;
    std::string track = "single";
    std::string memory = "none";
    std::size_t budget = 768;
    std::optional<std::size_t> k;
    std::size_t max_steps = 10;
    std::optional<std::uint64_t> seed;
    std::string endpoint;
    std::string model;
    std::string scripted;
    std::string out;
    std::size_t jobs = 1;
    // fixture
    int users = 10;
    int products = 50;
    // build-align
    int samples = 10;
    double temperature = 1.5;
    // report
    std::vector<std::string> inputs;
};

// Files written by one run, in write order.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        jsonl::write_file(dir_ / name, content);
        hashes_.push_back({name, sha256_hex(content)});
    }

    void manifest(std::string_view command, nlohmann::ordered_json config) {
        nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
        for (const auto& [name, hash] : hashes_) outputs[name] = hash;
        nlohmann::ordered_json m;
        m["command"] = command;
        m["config"] = std::move(config);
        m["outputs"] = std::move(outputs);
        jsonl::write_file(dir_ / "manifest.json", m.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> hashes_;
};

std::uint64_t need_seed(const Options& o, std::string_view command) {
    if (!o.seed) throw InvalidArgument(std::string(command) + " needs --seed");
    return *o.seed;
}

fs::path need_out(const Options& o, std::string_view command) {
    if (o.out.empty()) throw InvalidArgument(std::string(command) + " needs --out");
    return o.out;
}

corpus::DatasetBundle load_dataset(const Options& o) {
    if (o.dataset.empty()) throw InvalidArgument("--dataset is required");
    if (o.dataset == "fixture" && !fs::exists(o.dataset)) {
        return corpus::generate_fixture(o.seed.value_or(7), 10, 50);
    }
    if (!fs::is_directory(o.dataset)) throw InvalidArgument("dataset directory not found: " + o.dataset);
    return corpus::load_bundle(o.dataset);
}

nlohmann::ordered_json base_config(const Options& o) {
    nlohmann::ordered_json c;
    c["dataset"] = o.dataset;
    if (o.seed) c["seed"] = *o.seed;
    return c;
}

bool live(const Options& o) { return o.scripted.empty(); }

std::shared_ptr<agent::Policy> live_policy(const Options& o, agent::Sampling sampling = {}) {
    if (o.endpoint.empty() || o.model.empty()) {
        throw InvalidArgument("either --scripted or both --endpoint and --model are required");
    }
    agent::PolicyConfig cfg;
    cfg.endpoint = o.endpoint;
    cfg.model = o.model;
    cfg.sampling = sampling;
    if (const char* key = std::getenv(kApiKeyEnv)) cfg.api_key = key;
    auto policy = std::make_shared<agent::HttpChatPolicy>(cfg);
    return std::make_shared<agent::InflightLimiter>(policy, static_cast<std::ptrdiff_t>(o.jobs));
}

// --- fixture / index / train-rec -------------------------------------------------

int cmd_fixture(const Options& o) {
    corpus::FixtureOptions fo;
    fo.seed = need_seed(o, "fixture");
    fo.n_users = o.users;
    fo.n_products = o.products;
    const auto bundle = corpus::generate_fixture(fo);
    Outputs out(need_out(o, "fixture"));
    out.write("catalog.jsonl", corpus::serialize_catalog(bundle.catalog));
    out.write("users.jsonl", corpus::serialize_users(bundle.users));
    out.write("instructions.jsonl", corpus::serialize_instructions(bundle.instructions));
    out.write("bundle.json", nlohmann::json{{"split", corpus::to_string(bundle.split)}}.dump() + "\n");
    auto config = base_config(o);
    config["users"] = o.users;
    config["products"] = o.products;
    out.manifest("fixture", config);
    std::cout << "fixture: " << bundle.users.size() << " users, " << bundle.catalog.size() << " products, "
              << bundle.instructions.size() << " instructions -> " << o.out << "\n";
    return 0;
}

int cmd_index(const Options& o) {
    const auto bundle = load_dataset(o);
    const auto index = retrieval::Bm25Index::build(bundle.catalog);
    Outputs out(need_out(o, "index"));
    out.write("index.json", index.to_json().dump() + "\n");
    out.manifest("index", base_config(o));
    std::cout << "index: " << index.doc_count() << " documents, " << index.vocabulary_size() << " terms\n";
    return 0;
}

int cmd_train_rec(const Options& o) {
    const auto bundle = load_dataset(o);
    const auto model = webenv::train_cooc(webenv::training_sequences(bundle.users), bundle.catalog);
    Outputs out(need_out(o, "train-rec"));
    out.write("cooc.json", model.to_json().dump() + "\n");
    out.manifest("train-rec", base_config(o));
    std::cout << "train-rec: " << model.eligible().size() << " eligible products\n";
    return 0;
}

// --- gen-bench ---------------------------------------------------------------------

int cmd_gen_bench(const Options& o) {
    const auto seed = need_seed(o, "gen-bench");
    auto bundle = load_dataset(o);
    std::shared_ptr<agent::Policy> policy;
    if (live(o)) {
        policy = live_policy(o);
    } else {
        // Profile scripts are keyed "profile:<user_id>", instruction scripts by id;
        // queued in the order generation consumes them.
        const auto book = scripted::load_scripts(o.scripted);
        auto queue = std::make_shared<agent::ScriptedPolicy>();
        auto push = [&](const std::string& key) {
            if (auto it = book.find(key); it != book.end()) {
                for (const auto& r : it->second.responses) queue->push(r);
            }
        };
        for (const auto& u : bundle.users) push("profile:" + u.user_id);
        for (const auto& i : bundle.instructions) push(i.instruction_id);
        policy = queue;
    }
    benchgen::generate_profiles(bundle, *policy);
    benchgen::generate_instructions(bundle, *policy);
    Outputs out(need_out(o, "gen-bench"));
    out.write("catalog.jsonl", corpus::serialize_catalog(bundle.catalog));
    out.write("users.jsonl", corpus::serialize_users(bundle.users));
    out.write("instructions.jsonl", corpus::serialize_instructions(bundle.instructions));
    out.write("bundle.json", nlohmann::json{{"split", corpus::to_string(bundle.split)}}.dump() + "\n");
    auto config = base_config(o);
    config["seed"] = seed;
    config["template_version"] = benchgen::kTemplateVersion;
    config["policy"] = live(o) ? "endpoint:" + o.model : "scripted:" + fs::path(o.scripted).filename().string();
    out.manifest("gen-bench", config);
    std::cout << "gen-bench: " << bundle.users.size() << " profiles, " << bundle.instructions.size()
              << " instructions -> " << o.out << "\n";
    return 0;
}

// --- eval ----------------------------------------------------------------------------

int cmd_eval(const Options& o, agent::Track track) {
    const std::string command = track == agent::Track::single ? "eval-single" : "eval-multi";
    const auto seed = need_seed(o, command);
    const auto bundle = load_dataset(o);
    const auto world = webenv::World::build(bundle);
    auto embedder = std::make_shared<const retrieval::HashedTfEmbedder>(256);

    auto rcfg = track == agent::Track::single ? memory::RetrievalConfig::single_turn()
                                              : memory::RetrievalConfig::multi_turn();
    if (o.k) rcfg.k = *o.k;
    rcfg.token_budget = o.budget;
    const auto strategy = memory::parse_strategy(o.memory);
    const eval::MemoryProvider memory_provider(bundle, embedder, strategy, rcfg, seed);

    eval::EpisodeOptions eopts;
    eopts.max_steps = o.max_steps;

    // Policy source: a transcript file, a built-in offline agent, or a live endpoint.
    std::optional<scripted::ScriptBook> book;
    std::shared_ptr<agent::Policy> shared_policy;
    if (o.scripted == "oracle") {
        book = scripted::oracle_scripts(bundle, world, track);
    } else if (o.scripted == "heuristic") {
        shared_policy = std::make_shared<scripted::HeuristicPolicy>();
    } else if (!o.scripted.empty()) {
        book = scripted::load_scripts(o.scripted);
    } else {
        shared_policy = live_policy(o);
    }
    constexpr std::string_view kFallbackReply = "Please go ahead with what you have.";

    const auto& instructions = bundle.instructions;
    auto episodes = eval::run_parallel(instructions.size(), o.jobs, [&](std::size_t i) {
        const auto& ins = instructions[i];
        webenv::EnvState env(world, ins.user_id);
        const auto mem = memory_provider.memory_for(ins);
        std::shared_ptr<agent::Policy> policy = shared_policy;
        std::unique_ptr<eval::Simulator> simulator;
        if (book) {
            const auto it = book->find(ins.instruction_id);
            const scripted::Script script = it == book->end() ? scripted::Script{} : it->second;
            policy = std::make_shared<agent::ScriptedPolicy>(script.responses);
            simulator = std::make_unique<eval::ScriptedSimulator>(script.simulator, std::string(kFallbackReply));
        } else if (o.scripted == "heuristic") {
            simulator = std::make_unique<eval::ScriptedSimulator>(std::vector<std::string>{},
                                                                  std::string(kFallbackReply));
        } else {
            simulator = std::make_unique<eval::PolicySimulator>(shared_policy, bundle);
        }
        if (track == agent::Track::single) return eval::run_single_turn(*policy, ins, env, mem, *embedder, eopts);
        return eval::run_multi_turn(*policy, *simulator, ins, env, mem, *embedder, eopts);
    });

    std::vector<nlohmann::json> rows;
    for (const auto& e : episodes) rows.push_back(eval::to_json(e));
    const auto report = eval::aggregate(episodes);
    const auto table = eval::render_table(report, command + " (memory: " + o.memory + ")");

    Outputs out(need_out(o, command));
    out.write("episodes.jsonl", jsonl::dump_lines(rows));
    out.write("report.json", eval::to_json(report).dump(2) + "\n");
    out.write("report.txt", table);
    auto config = base_config(o);
    config["seed"] = seed;
    config["track"] = agent::to_string(track);
    config["memory"] = o.memory;
    config["k"] = rcfg.k;
    config["budget"] = rcfg.token_budget;
    if (track == agent::Track::multi) config["max_steps"] = o.max_steps;
    config["policy"] = live(o) ? "endpoint:" + o.model
                               : (o.scripted == "oracle" || o.scripted == "heuristic"
                                      ? o.scripted
                                      : "scripted:" + fs::path(o.scripted).filename().string());
    config["template_version"] = benchgen::kTemplateVersion;
    out.manifest(command, config);
    std::cout << table;
    return 0;
}

// --- build-align ---------------------------------------------------------------------

int cmd_build_align(const Options& o) {
    const auto seed = need_seed(o, "build-align");
    const auto bundle = load_dataset(o);
    const auto world = webenv::World::build(bundle);
    const retrieval::HashedTfEmbedder embedder(256);
    auto rcfg = memory::RetrievalConfig::single_turn();
    if (o.k) rcfg.k = *o.k;
    rcfg.token_budget = o.budget;

    std::optional<scripted::ScriptBook> book;
    std::shared_ptr<agent::Policy> policy;
    const agent::Sampling sampling{o.temperature, 512};
    if (o.scripted == "oracle") {
        book.emplace();
    } else if (!o.scripted.empty()) {
        book = scripted::load_scripts(o.scripted);
    } else {
        policy = live_policy(o);
    }

    std::map<std::string, memory::MemoryBank> banks;
    for (const auto& u : bundle.users) banks.emplace(u.user_id, memory::build_memory_bank(u, bundle.catalog, embedder));

    std::vector<align::SftExample> sft;
    std::vector<align::PreferenceRecord> prefs;
    std::size_t skipped = 0;
    for (const auto& ins : bundle.instructions) {
        const auto& bank = banks.at(ins.user_id);
        const auto tm = memory::retrieve_task_memory(bank, ins.text, ins.task_kind, rcfg, embedder);
        try {
            sft.push_back(align::build_sft_label(ins, tm, bank, bundle.catalog, policy.get()));
        } catch (const ValidationError&) {
            ++skipped;
            continue;
        }
        const auto prompt = agent::assemble_prompt(agent::Track::single, ins, tm.serialize(),
                                                   webenv::tool_schemas(false), {});
        const auto function = webenv::task_tool_for(ins.task_kind);
        std::vector<align::Candidate> candidates;
        if (policy) {
            candidates = align::sample_candidates(*policy, prompt, function, o.samples, sampling);
        } else {
            std::vector<std::string> texts;
            if (o.scripted == "oracle") {
                texts = {scripted::render_call(scripted::oracle_call(ins, world)),
                         scripted::render_call(scripted::HeuristicPolicy::decide(prompt)),
                         scripted::render_call(webenv::FunctionCall::search(ins.text))};
            } else if (auto it = book->find(ins.instruction_id); it != book->end()) {
                texts = it->second.responses;
            }
            if (texts.size() < 2) continue;
            agent::ScriptedPolicy replay(texts);
            candidates = align::sample_candidates(replay, prompt, function, static_cast<int>(texts.size()), sampling);
        }
        const auto scored = align::score_candidates(candidates, function, ins, world, embedder);
        if (auto rec = align::make_preference_record(sft.back().input, scored)) prefs.push_back(std::move(*rec));
    }

    const auto dir = need_out(o, "build-align");
    align::export_alignment_datasets(sft, prefs, dir);
    Outputs out(dir);
    // Hash what the exporter wrote.
    for (const char* name : {"sft.jsonl", "preference.jsonl"}) out.write(name, jsonl::read_file(dir / name));
    auto config = base_config(o);
    config["seed"] = seed;
    config["k"] = rcfg.k;
    config["budget"] = rcfg.token_budget;
    config["samples"] = o.samples;
    config["temperature"] = o.temperature;
    config["policy"] = live(o) ? "endpoint:" + o.model
                               : (o.scripted == "oracle" ? o.scripted
                                                         : "scripted:" + fs::path(o.scripted).filename().string());
    out.manifest("build-align", config);
    std::cout << "build-align: " << sft.size() << " SFT examples, " << prefs.size() << " preference pairs";
    if (skipped) std::cout << " (" << skipped << " instructions without usable memory)";
    std::cout << "\n";
    return 0;
}

// --- report ------------------------------------------------------------------------------

int cmd_report(const Options& o) {
    if (o.inputs.empty()) throw InvalidArgument("report needs at least one episodes.jsonl file");
    std::vector<eval::EpisodeRecord> episodes;
    for (const auto& path : o.inputs) {
        fs::path p = path;
        if (fs::is_directory(p)) p /= "episodes.jsonl";
        jsonl::for_each_record(p, [&](const nlohmann::json& j, std::size_t) {
            episodes.push_back(eval::episode_from_json(j));
        });
    }
    const auto report = eval::aggregate(episodes);
    const auto table = eval::render_table(report);
    if (!o.out.empty()) {
        Outputs out(o.out);
        out.write("report.json", eval::to_json(report).dump(2) + "\n");
        out.write("report.txt", table);
        nlohmann::ordered_json config;
        config["inputs"] = o.inputs;
        out.manifest("report", config);
    }
    std::cout << table;
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Personalized web-agent benchmark harness"};
    app.require_subcommand(1);
    Options o;

    auto add_dataset = [&](CLI::App* c) { c->add_option("--dataset", o.dataset, "Dataset directory, or 'fixture'"); };
    auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Random seed"); };
    auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output directory"); };
    auto add_policy = [&](CLI::App* c) {
        c->add_option("--scripted", o.scripted,
                      "Transcript file (JSONL), or a built-in offline agent: oracle, heuristic");
        c->add_option("--endpoint", o.endpoint, "Chat-completions base URL (credential from $PWAB_API_KEY)");
        c->add_option("--model", o.model, "Model name sent to the endpoint");
        c->add_option("--jobs", o.jobs, "Concurrent episodes / in-flight requests")->check(CLI::PositiveNumber);
    };
    auto add_memory = [&](CLI::App* c) {
        c->add_option("--memory", o.memory, "Memory strategy")
            ->check(CLI::IsMember({"none", "random", "last", "relevant", "puma"}));
        c->add_option("--budget", o.budget, "Memory token budget")->check(CLI::IsMember({256, 512, 768}));
        c->add_option("--k", o.k, "Entries retrieved before extraction")->check(CLI::PositiveNumber);
    };

    auto* fixture = app.add_subcommand("fixture", "Generate the seeded synthetic dataset");
    add_seed(fixture);
    add_out(fixture);
    fixture->add_option("--users", o.users, "Number of users")->check(CLI::PositiveNumber);
    fixture->add_option("--products", o.products, "Number of products")->check(CLI::PositiveNumber);

    auto* index = app.add_subcommand("index", "Build the BM25 index over the catalog");
    add_dataset(index);
    add_seed(index);
    add_out(index);

    auto* train_rec = app.add_subcommand("train-rec", "Train the co-occurrence recommender");
    add_dataset(train_rec);
    add_seed(train_rec);
    add_out(train_rec);

    auto* gen_bench = app.add_subcommand("gen-bench", "Generate user profiles and instructions");
    add_dataset(gen_bench);
    add_seed(gen_bench);
    add_out(gen_bench);
    add_policy(gen_bench);

    auto* eval_single = app.add_subcommand("eval-single", "Run the single-turn track");
    auto* eval_multi = app.add_subcommand("eval-multi", "Run the multi-turn track");
    for (auto* c : {eval_single, eval_multi}) {
        add_dataset(c);
        add_seed(c);
        add_out(c);
        add_policy(c);
        add_memory(c);
        c->add_option("--track", o.track, "Track (must match the subcommand)")
            ->check(CLI::IsMember({"single", "multi"}));
    }
    eval_multi->add_option("--max-steps", o.max_steps, "Step budget per episode")->check(CLI::PositiveNumber);

    auto* build_align = app.add_subcommand("build-align", "Export SFT and preference datasets");
    add_dataset(build_align);
    add_seed(build_align);
    add_out(build_align);
    add_policy(build_align);
    add_memory(build_align);
    build_align->add_option("--samples", o.samples, "Candidates sampled per instruction")->check(CLI::Range(2, 100));
    build_align->add_option("--temperature", o.temperature, "Sampling temperature")->check(CLI::NonNegativeNumber);

    auto* report = app.add_subcommand("report", "Aggregate episode files into a report");
    report->add_option("inputs", o.inputs, "episodes.jsonl files or run directories")->required();
    add_out(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*fixture) return cmd_fixture(o);
        if (*index) return cmd_index(o);
        if (*train_rec) return cmd_train_rec(o);
        if (*gen_bench) return cmd_gen_bench(o);
        if (*eval_single || *eval_multi) {
            const auto track = *eval_single ? agent::Track::single : agent::Track::multi;
            const auto* sub = *eval_single ? eval_single : eval_multi;
            if (sub->count("--track") && o.track != agent::to_string(track)) {
                throw InvalidArgument("--track " + o.track + " does not match the subcommand");
            }
            return cmd_eval(o, track);
        }
        if (*build_align) return cmd_build_align(o);
        if (*report) return cmd_report(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace pwab::cli

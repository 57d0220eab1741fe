// One line per acceptance criterion; exit status is nonzero if any fails.

#include <pwab/align.hpp>
#include <pwab/benchgen.hpp>
#include <pwab/cli.hpp>
#include <pwab/eval.hpp>
#include <pwab/jsonl.hpp>
#include <pwab/scripted.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "../unit/oracles.hpp"
#include "../unit/support.hpp"

using namespace pwab;
using webenv::FunctionCall;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

int failures = 0;

void criterion(int n, const std::string& title, double limit_ms, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (ms >= limit_ms) out.require(false, "runtime over budget");
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.3f ms, budget %.0f ms", ms, limit_ms);
    std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << title << " (" << timing << ")";
    if (!out.detail.empty()) std::cout << " -- " << out.detail;
    std::cout << std::endl;
    if (!out.pass) ++failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string slurp(const std::filesystem::path& p) { return jsonl::read_file(p); }

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pwab");
    // Keep the acceptance report readable: CLI tables go to a discarded stream.
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    const int rc = cli::run(args);
    std::cout.rdbuf(old);
    return rc;
}

// --- 1 ----------------------------------------------------------------------------

Outcome metric_table() {
    Outcome o;
    const corpus::Instruction ins{"i", "u", corpus::TaskKind::search, "q", "T", std::nullopt};
    const retrieval::HashedTfEmbedder emb;
    const double expected[] = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0, 0.0};
    for (std::size_t r = 1; r <= 12; ++r) {
        // A list of ten with the target at rank r, or absent for r > 10.
        webenv::RankedList list;
        for (std::size_t i = 1; i <= 10; ++i) list.items.push_back({i, i == r ? "T" : "X" + std::to_string(i), 0.0});
        const eval::GradedCall g{FunctionCall::search("q"), true, webenv::FunctionResult{
                                                                      webenv::FunctionKind::search_product_by_query, list}};
        const double got = eval::result_accuracy(g, ins, emb);
        o.require(got == expected[r - 1], "rank " + std::to_string(r) + " scored " + fmt(got));
        o.require(eval::rank_score(r) == expected[r - 1], "rank_score(" + std::to_string(r) + ")");
    }
    return o;
}

// --- 2 ----------------------------------------------------------------------------

Outcome dpo_identities() {
    Outcome o;
    for (double beta : {0.1, 1.0, 10.0}) {
        const double l = align::dpo_loss({-3.0, -3.0, -3.0, -3.0, beta});
        o.require(std::abs(l - std::log(2.0)) <= 1e-12, "zero margin at beta " + fmt(beta) + " gave " + fmt(l));
    }
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> logp(-8.0, 0.0);
    std::uniform_real_distribution<double> log_beta(std::log(0.05), std::log(5.0));
    const double h = 1e-6;
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const align::DpoPoint p{logp(rng), logp(rng), logp(rng), logp(rng), std::exp(log_beta(rng))};
        const auto g = align::dpo_grad(p);
        for (int which = 0; which < 2; ++which) {
            auto plus = p, minus = p;
            (which == 0 ? plus.policy_best : plus.policy_worst) += h;
            (which == 0 ? minus.policy_best : minus.policy_worst) -= h;
            const double numeric = (align::dpo_loss(plus) - align::dpo_loss(minus)) / (2 * h);
            const double analytic = which == 0 ? g.d_policy_best : g.d_policy_worst;
            const double rel = std::abs(analytic - numeric) / std::abs(analytic);
            worst = std::max(worst, rel);
        }
    }
    o.require(worst <= 1e-5, "max relative error " + fmt(worst));
    if (o.pass) o.detail = "max relative error " + fmt(worst);
    return o;
}

// --- 3 ----------------------------------------------------------------------------

Outcome bm25_oracle() {
    Outcome o;
    std::mt19937_64 rng(31337);
    std::size_t queries = 0;
    for (int c = 0; c < 200 && o.pass; ++c) {
        const int docs = 10 + static_cast<int>(rng() % 91);
        const auto bundle = corpus::generate_fixture(rng(), 1, docs);
        const auto index = retrieval::Bm25Index::build(bundle.catalog);
        // Vocabulary drawn from the corpus itself plus a term that never occurs.
        std::vector<std::string> vocab = {"zzzunseen"};
        for (const auto& p : bundle.catalog.products()) {
            for (auto& t : retrieval::tokenize(retrieval::indexed_text(p, retrieval::default_index_fields()))) {
                vocab.push_back(std::move(t));
            }
        }
        for (int q = 0; q < 5; ++q) {
            std::string query;
            const int len = 1 + static_cast<int>(rng() % 4);
            for (int t = 0; t < len; ++t) query += vocab[rng() % vocab.size()] + " ";
            const std::size_t k = 1 + rng() % static_cast<std::size_t>(docs + 5);
            const auto got = index.query_top_k(query, k);
            const auto want = test::brute_force_bm25(bundle.catalog, query, k);
            ++queries;
            o.require(got.size() == want.size(), "size mismatch on corpus " + std::to_string(c));
            for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
                o.require(got[i].product_id == want[i].product_id,
                          "order mismatch on corpus " + std::to_string(c) + " query '" + query + "'");
                o.require(std::abs(got[i].score - want[i].score) <= 1e-9, "score mismatch");
            }
        }
    }
    if (o.pass) o.detail = std::to_string(queries) + " queries over 200 corpora";
    return o;
}

// --- 4 ----------------------------------------------------------------------------

Outcome task_memory_oracle() {
    Outcome o;
    const retrieval::HashedTfEmbedder emb;
    std::mt19937_64 rng(4242);
    const std::map<corpus::TaskKind, std::set<std::string>> fields = {
        {corpus::TaskKind::search, {"title", "category", "price", "store"}},
        {corpus::TaskKind::recommendation, {"title", "category", "parent_asin"}},
        {corpus::TaskKind::review, {"rating", "review_text"}}};
    for (int c = 0; c < 200 && o.pass; ++c) {
        const auto bundle = corpus::generate_fixture(rng(), 3, 20 + static_cast<int>(rng() % 40));
        auto user = bundle.users[rng() % bundle.users.size()];
        // Duplicate some behaviors so similarity ties occur.
        if (c % 3 == 0 && !user.history.empty()) {
            auto dup = user.history.front();
            user.history.insert(user.history.begin() + 1, dup);
        }
        const auto bank = memory::build_memory_bank(user, bundle.catalog, emb);
        const auto& ins = bundle.instructions[rng() % bundle.instructions.size()];
        const auto kind = corpus::kAllTaskKinds[rng() % 3];
        const std::size_t k = 1 + rng() % 60;
        const auto tm = memory::retrieve_task_memory(bank, ins.text, kind, {k, 1000000}, emb);

        // Selection sort by (similarity at 1e-12 resolution, timestamp, index), computed directly.
        const auto q = emb.embed(ins.text);
        std::vector<std::size_t> remaining(bank.entries.size());
        std::iota(remaining.begin(), remaining.end(), 0);
        std::vector<std::size_t> want;
        while (!remaining.empty() && want.size() < k) {
            std::size_t best_pos = 0;
            for (std::size_t j = 1; j < remaining.size(); ++j) {
                const auto a = remaining[j], b = remaining[best_pos];
                double sa = 0, sb = 0, na = 0, nb = 0, nq = 0;
                for (std::size_t d = 0; d < q.size(); ++d) {
                    sa += q[d] * bank.embeddings[a][d];
                    sb += q[d] * bank.embeddings[b][d];
                    na += bank.embeddings[a][d] * bank.embeddings[a][d];
                    nb += bank.embeddings[b][d] * bank.embeddings[b][d];
                    nq += q[d] * q[d];
                }
                const double ca = (na > 0 && nq > 0) ? sa / std::sqrt(na * nq) : 0;
                const double cb = (nb > 0 && nq > 0) ? sb / std::sqrt(nb * nq) : 0;
                const auto ta = bank.entries[a].timestamp, tb = bank.entries[b].timestamp;
                const double ka = std::round(ca * 1e12), kb = std::round(cb * 1e12);
                if (ka != kb ? ka > kb : (ta != tb ? ta > tb : a > b)) best_pos = j;
            }
            want.push_back(remaining[best_pos]);
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
        }
        o.require(tm.entries.size() == want.size(), "selection size on case " + std::to_string(c));
        for (std::size_t i = 0; i < std::min(want.size(), tm.entries.size()); ++i) {
            const auto& got = tm.entries[i];
            const bool same = got.bank_index == want[i] ||
                              (memory::serialize_entry(bank.entries[got.bank_index]) ==
                                       memory::serialize_entry(bank.entries[want[i]]) &&
                               bank.entries[got.bank_index].timestamp == bank.entries[want[i]].timestamp);
            o.require(same, "selection order on case " + std::to_string(c));
            std::set<std::string> names;
            for (const auto& f : got.features.fields) names.insert(f.first);
            o.require(names == fields.at(kind), "field set for " + std::string(corpus::to_string(kind)));
        }
    }
    if (o.pass) o.detail = "200 cases";
    return o;
}

// --- 5 ----------------------------------------------------------------------------

Outcome cooc_oracle() {
    Outcome o;
    std::vector<corpus::Product> products;
    for (const char* id : {"A", "B", "C", "D", "E", "F", "G"}) products.push_back(test::product(id, std::string("item ") + id));
    const corpus::Catalog catalog(products);
    // 20 interactions over four sessions.
    const std::vector<std::vector<std::string>> seqs = {
        {"A", "B", "C", "A", "B", "D"}, {"B", "C", "D", "E", "A"}, {"C", "A", "B", "B", "F"}, {"E", "A", "B", "C"}};
    std::size_t total = 0;
    for (const auto& s : seqs) total += s.size();
    o.require(total == 20, "fixture must hold 20 interactions");
    const auto model = webenv::train_cooc(seqs, catalog);

    // Counted by hand from the sequences above.
    const std::map<std::pair<std::string, std::string>, std::uint64_t> hand = {
        {{"A", "B"}, 4}, {{"B", "C"}, 3}, {{"C", "A"}, 2}, {{"B", "D"}, 1}, {{"C", "D"}, 1}, {{"D", "E"}, 1},
        {{"E", "A"}, 2}, {{"B", "B"}, 1}, {{"B", "F"}, 1}};
    o.require(hand == test::count_pairs(seqs).pairs, "hand count disagrees with the pair counter");
    const std::vector<std::string> ids = {"A", "B", "C", "D", "E", "F", "G"};
    for (const auto& from : ids) {
        for (const auto& to : ids) {
            const auto it = hand.find({from, to});
            const std::uint64_t want = it == hand.end() ? 0 : it->second;
            o.require(model.transition(from, to) == want, "count " + from + "->" + to);
        }
    }
    // History items never come back, over every ordered history of length 1 to 3.
    std::size_t histories = 0;
    for (const auto& a : ids) {
        for (const auto& b : ids) {
            for (const auto& c : ids) {
                for (const auto& h : std::vector<std::vector<std::string>>{{a}, {a, b}, {a, b, c}}) {
                    ++histories;
                    for (const auto& r : model.recommend(h, 10)) {
                        o.require(std::find(h.begin(), h.end(), r.product_id) == h.end(), "history item returned");
                    }
                }
            }
        }
    }
    if (o.pass) o.detail = std::to_string(histories) + " histories checked";
    return o;
}

// --- 6 ----------------------------------------------------------------------------

// Best achievable recommendation score for a target, by exhaustive search over
// anchors: for each anchor product the full ranking is taken and every prefix
// of products ranked above the target is tried as an exclusion set.
double best_achievable(const corpus::ProductId& target, const corpus::Instruction& ins, const webenv::World& world) {
    double best = 0;
    const auto n = world.catalog->size();
    for (const auto& anchor : world.catalog->products()) {
        if (anchor.product_id == target) continue;
        const auto full = world.recommender->recommend({anchor.product_id}, n);
        for (std::size_t excl = 0; excl <= full.size(); ++excl) {
            std::vector<corpus::ProductId> history;
            for (std::size_t i = 0; i < excl; ++i) {
                if (full[i].product_id != target) history.push_back(full[i].product_id);
            }
            history.push_back(anchor.product_id);
            webenv::EnvState env(world, ins.user_id);
            const auto res = env.dispatch(FunctionCall::recommend(history));
            best = std::max(best, eval::rank_score(eval::target_rank(*res.ranked(), target)));
            if (best == 1.0) return best;
        }
    }
    return best;
}

Outcome oracle_agent_end_to_end() {
    Outcome o;
    test::TempDir a, b;
    for (const auto* dir : {&a, &b}) {
        o.require(cli({"eval-single", "--dataset", "fixture", "--seed", "7", "--scripted", "oracle", "--out",
                       dir->path().string()}) == 0,
                  "eval-single failed");
    }
    o.require(slurp(a / "episodes.jsonl") == slurp(b / "episodes.jsonl"), "episodes differ across runs");
    o.require(slurp(a / "report.json") == slurp(b / "report.json"), "reports differ across runs");

    const auto bundle = corpus::generate_fixture(7, 10, 50);
    const auto world = webenv::World::build(bundle);
    o.require(bundle.users.size() == 10 && bundle.catalog.size() == 50 && bundle.instructions.size() >= 30,
              "fixture shape");
    std::map<std::string, const corpus::Instruction*> by_id;
    for (const auto& i : bundle.instructions) by_id[i.instruction_id] = &i;
    const auto episodes = jsonl::read_all(a / "episodes.jsonl");
    o.require(episodes.size() == bundle.instructions.size(), "episode count");
    double rec_sum = 0, rec_best = 0;
    for (const auto& j : episodes) {
        const auto e = eval::episode_from_json(j);
        const auto& ins = *by_id.at(e.instruction_id);
        o.require(e.function_acc == 1, "function accuracy on " + e.instruction_id);
        if (ins.task_kind == corpus::TaskKind::recommendation) {
            const double best = best_achievable(ins.ground_truth, ins, world);
            o.require(std::abs(e.result_acc - best) <= 1e-12,
                      e.instruction_id + ": " + fmt(e.result_acc) + " vs best " + fmt(best));
            rec_sum += e.result_acc;
            rec_best += best;
        } else {
            o.require(std::abs(e.result_acc - 1.0) <= 1e-12, e.instruction_id + " result " + fmt(e.result_acc));
        }
    }
    if (o.pass) o.detail = "recommendation mean " + fmt(rec_sum / 10) + " = best achievable " + fmt(rec_best / 10);
    return o;
}

// --- 7 ----------------------------------------------------------------------------

Outcome multi_turn_contract() {
    Outcome o;
    const auto bundle = corpus::generate_fixture(7, 10, 50);
    const auto world = webenv::World::build(bundle);
    const retrieval::HashedTfEmbedder emb;
    std::mt19937_64 rng(77);
    std::vector<eval::EpisodeRecord> episodes;
    double hand_steps = 0;
    for (int round = 0; round < 10; ++round) {
        for (const auto& ins : bundle.instructions) {
            const std::size_t max_steps = 1 + rng() % 10;
            std::vector<std::string> script;
            const std::size_t len = 1 + rng() % 12;
            for (std::size_t i = 0; i < len; ++i) {
                switch (rng() % 6) {
                    case 0: script.push_back(scripted::render_call(FunctionCall::respond("Could you tell me more?"))); break;
                    case 1: script.push_back(scripted::render_call(FunctionCall::search("kettle"))); break;
                    case 2: script.push_back(scripted::render_call(FunctionCall::recommend({ins.ground_truth}))); break;
                    case 3: script.push_back(scripted::render_call(FunctionCall::review("Good value."))); break;
                    case 4: script.push_back("not a tool call"); break;
                    default: script.push_back(scripted::render_call(FunctionCall::stop())); break;
                }
            }
            // Pad so the policy never runs dry before the budget does.
            while (script.size() < max_steps) script.push_back(scripted::render_call(FunctionCall::stop()));
            agent::ScriptedPolicy policy(script);
            eval::ScriptedSimulator sim({}, std::string("Something simple, please."));
            webenv::EnvState env(world, ins.user_id);
            eval::EpisodeOptions opts;
            opts.max_steps = max_steps;
            auto rec = eval::run_multi_turn(policy, sim, ins, env, "", emb, opts);
            o.require(!rec.failed, "episode failed: " + rec.error);
            o.require(rec.steps >= 1 && rec.steps <= max_steps, "steps out of range");
            // Hand count: actions up to and including the first stop, capped by the budget.
            std::size_t expect = max_steps;
            for (std::size_t i = 0; i < max_steps; ++i) {
                if (script[i] == scripted::render_call(FunctionCall::stop())) {
                    expect = i + 1;
                    break;
                }
            }
            o.require(rec.steps == expect, "steps " + std::to_string(rec.steps) + " vs " + std::to_string(expect));
            hand_steps += static_cast<double>(expect);
            episodes.push_back(std::move(rec));
        }
    }
    for (std::size_t budget : {1u, 3u, 10u}) {
        for (const auto& ins : bundle.instructions) {
            agent::ScriptedPolicy policy(
                std::vector<std::string>(budget, scripted::render_call(FunctionCall::respond("Anything else?"))));
            eval::ScriptedSimulator sim({}, std::string("No."));
            webenv::EnvState env(world, ins.user_id);
            eval::EpisodeOptions opts;
            opts.max_steps = budget;
            const auto rec = eval::run_multi_turn(policy, sim, ins, env, "", emb, opts);
            o.require(rec.steps == budget && rec.termination == eval::Termination::max_steps,
                      "respond-only agent did not stop at the budget");
            o.require(rec.function_acc == 0, "respond-only agent scored function accuracy");
        }
    }
    const auto report = eval::aggregate(episodes);
    const double want = hand_steps / static_cast<double>(episodes.size());
    o.require(std::abs(report.overall.steps - want) <= 1e-12, "average steps " + fmt(report.overall.steps));
    if (o.pass) o.detail = std::to_string(episodes.size()) + " episodes, average steps " + fmt(want);
    return o;
}

// --- 8 ----------------------------------------------------------------------------

Outcome profile_consistency() {
    Outcome o;
    const auto bundle = corpus::generate_fixture(7, 10, 50);
    const auto trials = eval::build_match_trials(bundle, 4, 8);
    const double oracle = eval::profile_behavior_match_task(
        trials, [](const eval::MatchTrial& t) { return t.true_index; }, 8);
    o.require(oracle == 1.0, "oracle chooser " + fmt(oracle));

    std::mt19937_64 rng(8);
    for (const auto& user : bundle.users) {
        std::vector<corpus::ProductId> pos, neg;
        std::set<corpus::ProductId> bought;
        for (const auto& b : user.all_behaviors()) bought.insert(b.product_id);
        for (const auto& id : bought) {
            if (pos.size() < 3) pos.push_back(id);
        }
        for (const auto& p : bundle.catalog.products()) {
            if (!bought.count(p.product_id) && neg.size() < 7) neg.push_back(p.product_id);
        }
        const eval::Ranker oracle_ranker = [](const eval::RankTrial& t) {
            std::vector<corpus::ProductId> out;
            for (const auto& i : t.items) {
                if (t.positives.count(i)) out.push_back(i);
            }
            for (const auto& i : t.items) {
                if (!t.positives.count(i)) out.push_back(i);
            }
            return out;
        };
        const auto m = eval::profile_product_rank_task(benchgen::format_profile(user.profile), pos, neg, oracle_ranker,
                                                       rng(), 5);
        o.require(m.ndcg == 1.0 && m.recall == 1.0, "oracle ranker (" + fmt(m.ndcg) + ", " + fmt(m.recall) + ")");
    }

    std::vector<eval::MatchTrial> many;
    for (int i = 0; i < 1000; ++i) many.push_back(trials[static_cast<std::size_t>(i) % trials.size()]);
    std::mt19937_64 chooser_rng(1000);
    const double random_acc = eval::profile_behavior_match_task(
        many, [&](const eval::MatchTrial& t) { return static_cast<std::size_t>(chooser_rng() % t.candidates.size()); },
        2024);
    o.require(random_acc >= 0.15 && random_acc <= 0.25, "random chooser " + fmt(random_acc));
    if (o.pass) o.detail = "random chooser top-1 " + fmt(random_acc);
    return o;
}

// --- 9 ----------------------------------------------------------------------------

Outcome alignment_pipeline() {
    Outcome o;
    const auto bundle = corpus::generate_fixture(7, 10, 50);
    const auto world = webenv::World::build(bundle);
    const retrieval::HashedTfEmbedder emb;
    test::TempDir out;
    o.require(cli({"build-align", "--dataset", "fixture", "--seed", "7", "--scripted", "oracle", "--out",
                   out.path().string()}) == 0,
              "build-align failed");
    const auto prefs = align::read_preferences(out / "preference.jsonl");
    o.require(!prefs.empty(), "no preference pairs exported");
    for (const auto& p : prefs) {
        const auto* ins = [&]() -> const corpus::Instruction* {
            for (const auto& i : bundle.instructions) {
                if (i.instruction_id == p.input.instruction_id) return &i;
            }
            return nullptr;
        }();
        o.require(ins != nullptr, "unknown instruction in export");
        if (!ins) break;
        const double best = align::score_arguments(p.p_best, p.input.function, *ins, world, emb);
        const double worst = align::score_arguments(p.p_worst, p.input.function, *ins, world, emb);
        o.require(best > worst, p.input.instruction_id + ": rescored " + fmt(best) + " <= " + fmt(worst));
        o.require(best == p.score_best && worst == p.score_worst, "rescoring does not reproduce stored scores");
    }

    // Every candidate unparseable: all scores equal, so no pair may be exported.
    scripted::ScriptBook flat;
    for (const auto& i : bundle.instructions) flat[i.instruction_id] = {{"no idea", "still no idea"}, {}};
    test::TempDir flat_dir, flat_out;
    scripted::save_scripts(flat, flat_dir / "flat.jsonl");
    o.require(cli({"build-align", "--dataset", "fixture", "--seed", "7", "--scripted",
                   (flat_dir / "flat.jsonl").string(), "--out", flat_out.path().string()}) == 0,
              "zero-margin build-align failed");
    o.require(align::read_preferences(flat_out / "preference.jsonl").empty(), "zero-margin set exported pairs");

    // Round trip.
    test::TempDir rt;
    const auto sft = align::read_sft(out / "sft.jsonl");
    align::export_alignment_datasets(sft, prefs, rt.path());
    o.require(align::read_sft(rt / "sft.jsonl") == sft, "SFT round trip");
    o.require(align::read_preferences(rt / "preference.jsonl") == prefs, "preference round trip");
    o.require(slurp(rt / "preference.jsonl") == slurp(out / "preference.jsonl"), "re-export bytes differ");
    if (o.pass) o.detail = std::to_string(prefs.size()) + " pairs, " + std::to_string(sft.size()) + " SFT examples";
    return o;
}

// --- 10 ---------------------------------------------------------------------------

double recommendation_function_accuracy(const corpus::DatasetBundle& bundle, const webenv::World& world,
                                        memory::Strategy strategy) {
    auto emb = std::make_shared<retrieval::HashedTfEmbedder>();
    const eval::MemoryProvider memories(bundle, emb, strategy, memory::RetrievalConfig::single_turn(), 7);

    // Record the rule-based agent's outputs, then replay them as transcripts.
    scripted::ScriptBook book;
    scripted::HeuristicPolicy recorder;
    for (const auto& ins : bundle.instructions) {
        const auto prompt = agent::assemble_prompt(agent::Track::single, ins, memories.memory_for(ins),
                                                   webenv::tool_schemas(false), {});
        book[ins.instruction_id] = {recorder.complete(prompt, 1), {}};
    }
    std::vector<eval::EpisodeRecord> episodes;
    for (const auto& ins : bundle.instructions) {
        agent::ScriptedPolicy replay(book.at(ins.instruction_id).responses);
        webenv::EnvState env(world, ins.user_id);
        episodes.push_back(eval::run_single_turn(replay, ins, env, memories.memory_for(ins), *emb));
    }
    return eval::aggregate(episodes).per_kind.at(corpus::TaskKind::recommendation).function_acc;
}

Outcome memory_direction() {
    Outcome o;
    const auto bundle = corpus::generate_fixture(7, 10, 50);
    const auto world = webenv::World::build(bundle);
    const double with_memory = recommendation_function_accuracy(bundle, world, memory::Strategy::puma);
    const double without = recommendation_function_accuracy(bundle, world, memory::Strategy::none);
    o.require(with_memory >= without, "task memory " + fmt(with_memory) + " < no memory " + fmt(without));
    o.detail = "recommendation F.Acc: task memory " + fmt(with_memory) + ", no memory " + fmt(without);
    return o;
}

}  // namespace

int main() {
    criterion(1, "rank metric takes exact values over ranks 1..12", 1, metric_table);
    criterion(2, "DPO zero-margin loss and gradient vs finite differences", 1000, dpo_identities);
    criterion(3, "BM25 top-k equals brute force on 200 random corpora", 10000, bm25_oracle);
    criterion(4, "task-memory selection equals brute-force similarity sort", 10000, task_memory_oracle);
    criterion(5, "co-occurrence counts match hand counts; history never returned", 1000, cooc_oracle);
    criterion(6, "oracle agent end to end on the seeded fixture", 30000, oracle_agent_end_to_end);
    criterion(7, "multi-turn step contract and average steps", 10000, multi_turn_contract);
    criterion(8, "profile-consistency harness with oracle and random choosers", 10000, profile_consistency);
    criterion(9, "alignment export, rescoring and round trip", 10000, alignment_pipeline);
    criterion(10, "task memory does not lower recommendation function accuracy", 30000, memory_direction);
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}

#include <pwab/eval.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pwab::eval {

double rank_score(std::optional<std::size_t> rank) {
    if (!rank || *rank < 1 || *rank > webenv::kResultListSize) return 0.0;
    // (11 - r) / 10 is correctly rounded, so the 11 values are exact decimals.
    return static_cast<double>(11 - *rank) / 10.0;
}

std::optional<std::size_t> target_rank(const webenv::RankedList& list, const corpus::ProductId& target) {
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        if (list.items[i].product_id == target) return i + 1;
    }
    return std::nullopt;
}

int function_accuracy(const std::optional<GradedCall>& graded, corpus::TaskKind task) {
    if (!graded || !graded->accepted) return 0;
    const auto kind = webenv::parse_function_kind(graded->call.name);
    return kind && *kind == webenv::task_tool_for(task) ? 1 : 0;
}

double review_similarity(std::string_view posted, std::string_view reference,
                         const retrieval::Embedder& embedder) {
    const double s = retrieval::cosine_sim(embedder.embed(posted), embedder.embed(reference));
    return std::clamp(s, 0.0, 1.0);
}

double result_accuracy(const std::optional<GradedCall>& graded, const corpus::Instruction& instruction,
                       const retrieval::Embedder& embedder) {
    if (function_accuracy(graded, instruction.task_kind) == 0) return 0.0;
    if (instruction.task_kind == corpus::TaskKind::review) {
        const auto& text = graded->call.arguments.at("review_text").get_ref<const std::string&>();
        return review_similarity(text, instruction.ground_truth, embedder);
    }
    if (!graded->result) return 0.0;
    const auto* list = graded->result->ranked();
    return list ? rank_score(target_rank(*list, instruction.ground_truth)) : 0.0;
}

double outcome_accuracy(const std::vector<webenv::RankedList>& lists, const corpus::ProductId& target) {
    double best = 0.0;
    for (const auto& l : lists) best = std::max(best, rank_score(target_rank(l, target)));
    return best;
}

double ndcg_at_k(const std::vector<corpus::ProductId>& ranked, const std::set<corpus::ProductId>& positives,
                 std::size_t k) {
    if (k < 1) throw InvalidArgument("ndcg_at_k: k must be >= 1");
    if (positives.empty()) return 0.0;
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (positives.count(ranked[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    double ideal = 0.0;
    for (std::size_t i = 0; i < std::min(k, positives.size()); ++i) {
        ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg / ideal;
}

double recall_at_k(const std::vector<corpus::ProductId>& ranked,
                   const std::set<corpus::ProductId>& positives, std::size_t k) {
    if (k < 1) throw InvalidArgument("recall_at_k: k must be >= 1");
    if (positives.empty()) return 0.0;
    std::set<corpus::ProductId> hit;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (positives.count(ranked[i])) hit.insert(ranked[i]);
    }
    return static_cast<double>(hit.size()) / static_cast<double>(positives.size());
}

// --- records ---------------------------------------------------------------

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::stop: return "stop";
        case Termination::max_steps: return "max_steps";
        case Termination::single_shot: return "single_shot";
        case Termination::parse_failure: return "parse_failure";
    }
    return "stop";
}

Termination parse_termination(std::string_view text) {
    for (auto t : {Termination::stop, Termination::max_steps, Termination::single_shot,
                   Termination::parse_failure}) {
        if (to_string(t) == text) return t;
    }
    throw ParseError("unknown termination '" + std::string(text) + "'");
}

nlohmann::json to_json(const EpisodeRecord& r) {
    nlohmann::json transcript = nlohmann::json::array();
    for (const auto& s : r.transcript) {
        nlohmann::json step = {{"actor", s.actor}, {"text", s.text}};
        if (s.call) {
            step["call"] = *s.call;
            step["accepted"] = s.accepted;
        }
        if (s.parse_failure) step["parse_failure"] = true;
        if (!s.error.empty()) step["error"] = s.error;
        transcript.push_back(std::move(step));
    }
    nlohmann::json j = {
        {"instruction_id", r.instruction_id},
        {"user_id", r.user_id},
        {"task_kind", corpus::to_string(r.task_kind)},
        {"track", agent::to_string(r.track)},
        {"steps", r.steps},
        {"graded_call", r.graded_call ? nlohmann::json(*r.graded_call) : nlohmann::json(nullptr)},
        {"function_acc", r.function_acc},
        {"result_acc", r.result_acc},
        {"last_call_result_acc", r.last_call_result_acc},
        {"best_call_result_acc", r.best_call_result_acc},
        {"outcome_acc", r.outcome_acc},
        {"per_call_result_acc", r.per_call_result_acc},
        {"termination", to_string(r.termination)},
        {"failed", r.failed},
        {"error", r.error},
        {"transcript", std::move(transcript)},
    };
    return j;
}

EpisodeRecord episode_from_json(const nlohmann::json& j) {
    EpisodeRecord r;
    r.instruction_id = j.at("instruction_id").get<std::string>();
    r.user_id = j.at("user_id").get<std::string>();
    r.task_kind = corpus::parse_task_kind(j.at("task_kind").get<std::string>());
    r.track = j.at("track").get<std::string>() == "multi" ? agent::Track::multi : agent::Track::single;
    r.steps = j.at("steps").get<std::size_t>();
    if (!j.at("graded_call").is_null()) r.graded_call = j.at("graded_call").get<webenv::FunctionCall>();
    r.function_acc = j.at("function_acc").get<int>();
    r.result_acc = j.at("result_acc").get<double>();
    r.last_call_result_acc = j.at("last_call_result_acc").get<double>();
    r.best_call_result_acc = j.at("best_call_result_acc").get<double>();
    r.outcome_acc = j.at("outcome_acc").get<double>();
    r.per_call_result_acc = j.at("per_call_result_acc").get<std::vector<double>>();
    r.termination = parse_termination(j.at("termination").get<std::string>());
    r.failed = j.at("failed").get<bool>();
    r.error = j.at("error").get<std::string>();
    for (const auto& s : j.at("transcript")) {
        TranscriptStep step;
        step.actor = s.at("actor").get<std::string>();
        step.text = s.at("text").get<std::string>();
        if (s.contains("call")) {
            step.call = s.at("call").get<webenv::FunctionCall>();
            step.accepted = s.at("accepted").get<bool>();
        }
        step.parse_failure = s.value("parse_failure", false);
        step.error = s.value("error", std::string());
        r.transcript.push_back(std::move(step));
    }
    return r;
}

// --- aggregation -------------------------------------------------------------

namespace {

struct Accumulator {
    std::size_t n = 0;
    double fn = 0, res = 0, out = 0, steps = 0;

    void add(const EpisodeRecord& e) {
        ++n;
        fn += e.function_acc;
        res += e.result_acc;
        out += e.outcome_acc;
        steps += static_cast<double>(e.steps);
    }
    ReportRow row() const {
        const double d = static_cast<double>(n);
        return {n, fn / d, res / d, out / d, steps / d};
    }
};

std::string cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

Report aggregate(const std::vector<EpisodeRecord>& episodes) {
    if (episodes.empty()) throw InvalidArgument("aggregate: no episodes");
    Report report;
    std::map<corpus::TaskKind, Accumulator> per_kind;
    Accumulator overall;
    for (const auto& e : episodes) {
        if (e.failed) {
            ++report.failed;
            continue;
        }
        per_kind[e.task_kind].add(e);
        overall.add(e);
    }
    for (const auto& [kind, acc] : per_kind) report.per_kind[kind] = acc.row();
    if (overall.n > 0) report.overall = overall.row();
    return report;
}

nlohmann::json to_json(const Report& report) {
    auto row = [](const ReportRow& r) {
        return nlohmann::json{{"episodes", r.episodes},
                              {"function_acc", r.function_acc},
                              {"result_acc", r.result_acc},
                              {"outcome_acc", r.outcome_acc},
                              {"steps", r.steps}};
    };
    nlohmann::json per_kind = nlohmann::json::object();
    for (const auto& [kind, r] : report.per_kind) per_kind[std::string(corpus::to_string(kind))] = row(r);
    return {{"per_kind", per_kind}, {"overall", row(report.overall)}, {"failed", report.failed}};
}

std::string render_table(const Report& report, std::string_view title) {
    char line[160];
    std::string out;
    if (!title.empty()) out += std::string(title) + "\n";
    std::snprintf(line, sizeof line, "%-16s %8s %10s %10s %10s %8s\n", "task", "episodes", "F.Acc",
                  "R.Acc", "O.Acc", "steps");
    out += line;
    auto emit = [&](std::string_view name, const ReportRow& r) {
        std::snprintf(line, sizeof line, "%-16.*s %8zu %10s %10s %10s %8s\n", static_cast<int>(name.size()),
                      name.data(), r.episodes, cell(r.function_acc).c_str(), cell(r.result_acc).c_str(),
                      cell(r.outcome_acc).c_str(), cell(r.steps).c_str());
        out += line;
    };
    for (const auto& [kind, r] : report.per_kind) emit(corpus::to_string(kind), r);
    emit("overall", report.overall);
    if (report.failed) out += "failed episodes excluded: " + std::to_string(report.failed) + "\n";
    return out;
}

}  // namespace pwab::eval

#include <pwab/align.hpp>
#include <pwab/eval.hpp>
#include <pwab/jsonl.hpp>

#include <algorithm>
#include <cmath>

namespace pwab::align {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\"'");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\"'");
    return std::string(s.substr(first, last - first + 1));
}

webenv::FunctionCall as_call(webenv::FunctionKind function, const nlohmann::json& arguments) {
    return {std::string(webenv::to_string(function)), arguments};
}

}  // namespace

SftExample build_sft_label(const corpus::Instruction& ins, const memory::TaskMemory& task_memory,
                           const memory::MemoryBank& bank, const corpus::Catalog& catalog,
                           agent::Policy* query_policy, const SftConfig& config) {
    SftExample ex;
    ex.input = {ins.instruction_id, ins.text, task_memory.serialize(), webenv::task_tool_for(ins.task_kind)};
    switch (ins.task_kind) {
        case corpus::TaskKind::review:
            ex.label = {{"review_text", ins.ground_truth}};
            break;
        case corpus::TaskKind::search: {
            std::string query;
            if (query_policy) {
                const std::string prompt =
                    "Write one short search query a shopping website would answer with the product this "
                    "request is about. Reply with the query only.\n\nRequest: " + ins.text +
                    (ex.input.memory.empty() ? std::string() : "\n\nPast purchases:\n" + ex.input.memory);
                const auto text = query_policy->complete({{agent::Role::user, prompt}}, 1,
                                                         config.query_sampling).front();
                query = trim(text.substr(0, text.find('\n')));
            }
            if (retrieval::tokenize(query).empty()) query = ins.text;
            ex.label = {{"query", query}};
            break;
        }
        case corpus::TaskKind::recommendation: {
            const auto& category = catalog.at(ins.ground_truth).category;
            // (timestamp, id) pairs, newest first
            std::vector<std::pair<std::int64_t, corpus::ProductId>> same, any;
            for (const auto& e : task_memory.entries) {
                const auto& entry = bank.entries.at(e.bank_index);
                any.emplace_back(entry.timestamp, entry.purchase.product_id);
                if (entry.purchase.category == category) same.emplace_back(entry.timestamp, entry.purchase.product_id);
            }
            if (any.empty()) {
                for (const auto& entry : bank.entries) any.emplace_back(entry.timestamp, entry.purchase.product_id);
            }
            auto newest_first = [](auto& v) {
                std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
            };
            ex.fallback = same.empty();
            auto& pool = ex.fallback ? any : same;
            newest_first(pool);
            std::vector<corpus::ProductId> ids;
            for (const auto& [ts, id] : pool) {
                if (ids.size() >= config.max_history) break;
                if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
            }
            if (ids.empty()) throw ValidationError("no memory to label recommendation " + ins.instruction_id);
            ex.label = {{"history", ids}};
            break;
        }
    }
    return ex;
}

std::optional<nlohmann::json> parse_candidate(std::string_view text, webenv::FunctionKind function) {
    const auto name = webenv::to_string(function);
    std::size_t from = 0;
    while (auto found = agent::extract_first_json_object(text, from)) {
        const auto& obj = found->first;
        nlohmann::json args;
        if (obj.contains("name") && obj.contains("arguments")) {
            if (obj["name"] != name) return std::nullopt;
            args = obj["arguments"];
        } else {
            args = obj;
        }
        try {
            (void)webenv::validate_schema(as_call(function, args));
            return args;
        } catch (const Error&) {
            from = found->second + 1;
        }
    }
    return std::nullopt;
}

std::vector<Candidate> sample_candidates(agent::Policy& policy, const std::vector<agent::ChatMessage>& prompt,
                                         webenv::FunctionKind function, int n, const agent::Sampling& sampling) {
    if (n < 2) throw InvalidArgument("sample_candidates: n must be >= 2");
    const auto texts = policy.complete(prompt, n, sampling);
    std::vector<Candidate> out;
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Candidate c{texts[i], parse_candidate(texts[i], function), i};
        // Parsed candidates dedupe on arguments, failed ones on raw text.
        const auto key = c.arguments ? "a" + c.arguments->dump() : "r" + c.raw;
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(key);
        out.push_back(std::move(c));
    }
    return out;
}

double score_arguments(const nlohmann::json& arguments, webenv::FunctionKind function,
                       const corpus::Instruction& ins, const webenv::World& world,
                       const retrieval::Embedder& embedder) {
    webenv::EnvState env(world, ins.user_id);
    eval::GradedCall graded{as_call(function, arguments), false, std::nullopt};
    try {
        graded.result = env.dispatch(graded.call);
        graded.accepted = true;
    } catch (const webenv::UnknownFunctionError&) {
    } catch (const webenv::MalformedParametersError&) {
    }
    return eval::result_accuracy(graded, ins, embedder);
}

std::vector<ScoredCandidate> score_candidates(const std::vector<Candidate>& candidates,
                                              webenv::FunctionKind function, const corpus::Instruction& ins,
                                              const webenv::World& world, const retrieval::Embedder& embedder) {
    std::vector<ScoredCandidate> out;
    for (const auto& c : candidates) {
        const double s = c.failed() ? 0.0 : score_arguments(*c.arguments, function, ins, world, embedder);
        out.push_back({c, s});
    }
    return out;
}

std::optional<std::pair<std::size_t, std::size_t>> select_preference_pair(
    const std::vector<ScoredCandidate>& scored) {
    if (scored.empty()) return std::nullopt;
    std::size_t best = 0, worst = 0;
    for (std::size_t i = 1; i < scored.size(); ++i) {
        if (scored[i].score > scored[best].score) best = i;
        if (scored[i].score < scored[worst].score) worst = i;
    }
    if (!(scored[best].score > scored[worst].score)) return std::nullopt;
    return std::make_pair(best, worst);
}

std::optional<PreferenceRecord> make_preference_record(const AlignInput& input,
                                                       const std::vector<ScoredCandidate>& scored) {
    const auto pair = select_preference_pair(scored);
    if (!pair) return std::nullopt;
    const auto& b = scored[pair->first];
    const auto& w = scored[pair->second];
    auto args = [](const Candidate& c) { return c.arguments.value_or(nlohmann::json::object()); };
    return PreferenceRecord{input, args(b.candidate), args(w.candidate), b.score, w.score};
}

// --- DPO ------------------------------------------------------------------------

namespace {

double margin(const DpoPoint& p) {
    for (double v : {p.policy_best, p.policy_worst, p.ref_best, p.ref_worst, p.beta}) {
        if (!std::isfinite(v)) throw InvalidArgument("dpo: non-finite input");
    }
    if (p.beta <= 0) throw InvalidArgument("dpo: beta must be > 0");
    const double z = p.beta * ((p.policy_best - p.ref_best) - (p.policy_worst - p.ref_worst));
    if (!std::isfinite(z)) throw InvalidArgument("dpo: margin overflows");
    return z;
}

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double dpo_loss(const DpoPoint& point) { return softplus(-margin(point)); }

DpoGrad dpo_grad(const DpoPoint& point) {
    const double g = point.beta * sigmoid(-margin(point));  // beta * (1 - sigmoid(z))
    return {-g, g};
}

double dpo_loss_mean(const std::vector<DpoPoint>& points) {
    if (points.empty()) throw InvalidArgument("dpo_loss_mean: no points");
    double sum = 0.0;
    for (const auto& p : points) sum += dpo_loss(p);
    return sum / static_cast<double>(points.size());
}

// --- files ------------------------------------------------------------------------

nlohmann::json to_json(const AlignInput& in) {
    return {{"instruction_id", in.instruction_id},
            {"instruction", in.instruction},
            {"memory", in.memory},
            {"function", webenv::to_string(in.function)}};
}

AlignInput input_from_json(const nlohmann::json& j) {
    const auto name = j.at("function").get<std::string>();
    const auto kind = webenv::parse_function_kind(name);
    if (!kind) throw ParseError("unknown function '" + name + "'");
    return {j.at("instruction_id").get<std::string>(), j.at("instruction").get<std::string>(),
            j.at("memory").get<std::string>(), *kind};
}

nlohmann::json to_json(const SftExample& ex) {
    return {{"input", to_json(ex.input)}, {"label", ex.label}, {"fallback", ex.fallback}};
}

SftExample sft_from_json(const nlohmann::json& j) {
    return {input_from_json(j.at("input")), j.at("label"), j.at("fallback").get<bool>()};
}

nlohmann::json to_json(const PreferenceRecord& r) {
    return {{"input", to_json(r.input)},
            {"p_best", r.p_best},
            {"p_worst", r.p_worst},
            {"score_best", r.score_best},
            {"score_worst", r.score_worst}};
}

PreferenceRecord preference_from_json(const nlohmann::json& j) {
    return {input_from_json(j.at("input")), j.at("p_best"), j.at("p_worst"),
            j.at("score_best").get<double>(), j.at("score_worst").get<double>()};
}

void export_alignment_datasets(const std::vector<SftExample>& sft,
                               const std::vector<PreferenceRecord>& preferences,
                               const std::filesystem::path& dir) {
    for (const auto& r : preferences) {
        if (!(r.score_best > r.score_worst)) {
            throw InvalidArgument("preference record for " + r.input.instruction_id +
                                  " has score_best <= score_worst");
        }
    }
    std::vector<nlohmann::json> rows;
    for (const auto& ex : sft) rows.push_back(to_json(ex));
    jsonl::write_file(dir / "sft.jsonl", jsonl::dump_lines(rows));
    rows.clear();
    for (const auto& r : preferences) rows.push_back(to_json(r));
    jsonl::write_file(dir / "preference.jsonl", jsonl::dump_lines(rows));
}

std::vector<SftExample> read_sft(const std::filesystem::path& path) {
    std::vector<SftExample> out;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(sft_from_json(j)); });
    return out;
}

std::vector<PreferenceRecord> read_preferences(const std::filesystem::path& path) {
    std::vector<PreferenceRecord> out;
    jsonl::for_each_record(path,
                           [&](const nlohmann::json& j, std::size_t) { out.push_back(preference_from_json(j)); });
    return out;
}

}  // namespace pwab::align

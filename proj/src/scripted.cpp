#include <pwab/jsonl.hpp>
#include <pwab/scripted.hpp>

#include <algorithm>
#include <cctype>

namespace pwab::scripted {

ScriptBook load_scripts(const std::filesystem::path& path) {
    ScriptBook book;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t line) {
        auto id = j.at("instruction_id").get<std::string>();
        Script s;
        s.responses = j.at("responses").get<std::vector<std::string>>();
        if (j.contains("simulator")) s.simulator = j.at("simulator").get<std::vector<std::string>>();
        if (!book.emplace(id, std::move(s)).second) {
            throw ParseError("duplicate script for instruction " + id, line);
        }
    });
    return book;
}

void save_scripts(const ScriptBook& book, const std::filesystem::path& path) {
    std::vector<nlohmann::json> rows;
    for (const auto& [id, s] : book) {
        rows.push_back({{"instruction_id", id}, {"responses", s.responses}, {"simulator", s.simulator}});
    }
    jsonl::write_file(path, jsonl::dump_lines(rows));
}

std::string render_call(const webenv::FunctionCall& call) { return nlohmann::json(call).dump(); }

namespace {

std::optional<std::size_t> rank_of(const std::vector<retrieval::ScoredProduct>& list,
                                   const corpus::ProductId& target) {
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i].product_id == target) return i + 1;
    }
    return std::nullopt;
}

bool better(std::optional<std::size_t> a, std::optional<std::size_t> b) {
    return a && (!b || *a < *b);
}

}  // namespace

std::optional<std::vector<corpus::ProductId>> rank_one_history(const corpus::ProductId& target,
                                                              const webenv::World& world) {
    const auto n = world.catalog->size();
    std::optional<std::size_t> best;
    std::vector<corpus::ProductId> history;
    for (const auto& p : world.catalog->products()) {
        if (p.product_id == target) continue;
        const auto full = world.recommender->recommend({p.product_id}, n);
        const auto r = rank_of(full, target);
        if (!better(r, best)) continue;
        best = r;
        history.clear();
        for (std::size_t i = 0; i + 1 < *r; ++i) history.push_back(full[i].product_id);
        history.push_back(p.product_id);
        if (*r == 1) break;
    }
    if (!best) return std::nullopt;
    return history;
}

webenv::FunctionCall oracle_call(const corpus::Instruction& ins, const webenv::World& world) {
    switch (ins.task_kind) {
        case corpus::TaskKind::review:
            return webenv::FunctionCall::review(ins.ground_truth);
        case corpus::TaskKind::recommendation: {
            if (auto history = rank_one_history(ins.ground_truth, world)) {
                return webenv::FunctionCall::recommend(std::move(*history));
            }
            // Nothing surfaces the target; any valid history will do.
            for (const auto& p : world.catalog->products()) {
                if (p.product_id != ins.ground_truth) return webenv::FunctionCall::recommend({p.product_id});
            }
            return webenv::FunctionCall::recommend({ins.ground_truth});
        }
        case corpus::TaskKind::search: {
            const auto& title = world.catalog->at(ins.ground_truth).title;
            std::vector<std::string> queries = {title};
            for (auto& t : retrieval::tokenize(title)) queries.push_back(std::move(t));
            std::string best_query = title;
            std::optional<std::size_t> best;
            for (const auto& q : queries) {
                const auto r = rank_of(world.index->query_top_k(q, webenv::kResultListSize), ins.ground_truth);
                if (better(r, best)) {
                    best = r;
                    best_query = q;
                }
            }
            return webenv::FunctionCall::search(best_query);
        }
    }
    return webenv::FunctionCall::stop();
}

ScriptBook oracle_scripts(const corpus::DatasetBundle& bundle, const webenv::World& world,
                          agent::Track track) {
    ScriptBook book;
    for (const auto& ins : bundle.instructions) {
        Script s{{render_call(oracle_call(ins, world))}, {}};
        if (track == agent::Track::multi) s.responses.push_back(render_call(webenv::FunctionCall::stop()));
        book.emplace(ins.instruction_id, std::move(s));
    }
    return book;
}

namespace {

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<corpus::ProductId> memory_ids(const std::string& system) {
    constexpr std::string_view key = "parent_asin: ";
    std::vector<corpus::ProductId> ids;
    for (auto pos = system.find(key); pos != std::string::npos; pos = system.find(key, pos + 1)) {
        const auto start = pos + key.size();
        auto end = start;
        while (end < system.size() && std::isalnum(static_cast<unsigned char>(system[end]))) ++end;
        corpus::ProductId id = system.substr(start, end - start);
        if (!id.empty() && std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(std::move(id));
    }
    return ids;
}

}  // namespace

webenv::FunctionCall HeuristicPolicy::decide(const std::vector<agent::ChatMessage>& messages) {
    if (messages.size() < 2) throw InvalidArgument("heuristic policy: prompt has no request");
    if (messages.size() > 2) return webenv::FunctionCall::stop();
    const auto& request_msg = messages[1].content;
    const auto at = request_msg.find("request: ");
    const auto request = at == std::string::npos ? request_msg : request_msg.substr(at + 9);
    const auto text = lower(request);
    if (text.find("recommend") != std::string::npos) {
        auto ids = memory_ids(messages[0].content);
        if (!ids.empty()) return webenv::FunctionCall::recommend(std::move(ids));
    }
    if (text.find("review") != std::string::npos) return webenv::FunctionCall::review(request);
    return webenv::FunctionCall::search(request);
}

std::vector<std::string> HeuristicPolicy::complete(const std::vector<agent::ChatMessage>& messages, int n,
                                                   const agent::Sampling&) {
    if (n < 1) throw InvalidArgument("complete: n must be >= 1");
    return std::vector<std::string>(static_cast<std::size_t>(n), render_call(decide(messages)));
}

}  // namespace pwab::scripted

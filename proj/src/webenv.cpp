#include <pwab/webenv.hpp>
#include <pwab/jsonl.hpp>

#include <algorithm>

namespace pwab::webenv {

std::string_view to_string(FunctionKind kind) {
    switch (kind) {
        case FunctionKind::search_product_by_query: return "search_product_by_query";
        case FunctionKind::get_recommendations_by_history: return "get_recommendations_by_history";
        case FunctionKind::add_product_review: return "add_product_review";
        case FunctionKind::respond: return "respond";
        case FunctionKind::stop: return "stop";
    }
    return "stop";
}

std::optional<FunctionKind> parse_function_kind(std::string_view name) {
    for (auto kind : kAllFunctionKinds) {
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

bool is_task_tool(FunctionKind kind) {
    return kind == FunctionKind::search_product_by_query ||
           kind == FunctionKind::get_recommendations_by_history ||
           kind == FunctionKind::add_product_review;
}

FunctionKind task_tool_for(corpus::TaskKind task) {
    switch (task) {
        case corpus::TaskKind::search: return FunctionKind::search_product_by_query;
        case corpus::TaskKind::recommendation: return FunctionKind::get_recommendations_by_history;
        case corpus::TaskKind::review: return FunctionKind::add_product_review;
    }
    return FunctionKind::search_product_by_query;
}

FunctionCall FunctionCall::search(std::string query) {
    return {"search_product_by_query", {{"query", std::move(query)}}};
}
FunctionCall FunctionCall::recommend(std::vector<corpus::ProductId> history) {
    return {"get_recommendations_by_history", {{"history", std::move(history)}}};
}
FunctionCall FunctionCall::review(std::string text) {
    return {"add_product_review", {{"review_text", std::move(text)}}};
}
FunctionCall FunctionCall::respond(std::string message) {
    return {"respond", {{"message", std::move(message)}}};
}
FunctionCall FunctionCall::stop() { return {"stop", nlohmann::json::object()}; }

void to_json(nlohmann::json& j, const FunctionCall& call) {
    j = {{"name", call.name}, {"arguments", call.arguments}};
}

void from_json(const nlohmann::json& j, FunctionCall& call) {
    call.name = j.at("name").get<std::string>();
    call.arguments = j.at("arguments");
}

namespace {

const std::string& string_field(const nlohmann::json& args, const char* key, std::string_view fn) {
    auto it = args.find(key);
    if (it == args.end()) {
        throw MalformedParametersError(std::string(fn) + ": missing parameter '" + key + "'");
    }
    if (!it->is_string()) {
        throw MalformedParametersError(std::string(fn) + ": parameter '" + key +
                                       "' must be a string");
    }
    return it->get_ref<const std::string&>();
}

void only_keys(const nlohmann::json& args, std::initializer_list<const char*> keys,
               std::string_view fn) {
    for (const auto& [k, _] : args.items()) {
        bool allowed = false;
        for (const char* key : keys) allowed = allowed || k == key;
        if (!allowed) {
            throw MalformedParametersError(std::string(fn) + ": unexpected parameter '" + k + "'");
        }
    }
}

}  // namespace

ValidatedCall validate_schema(const FunctionCall& call) {
    auto kind = parse_function_kind(call.name);
    if (!kind) {
        throw UnknownFunctionError("unknown function '" + call.name + "'");
    }
    const auto fn = to_string(*kind);
    const auto& args = call.arguments;
    if (!args.is_object()) {
        throw MalformedParametersError(std::string(fn) + ": arguments must be an object");
    }
    switch (*kind) {
        case FunctionKind::search_product_by_query:
            only_keys(args, {"query"}, fn);
            return {*kind, SearchParams{string_field(args, "query", fn)}};
        case FunctionKind::get_recommendations_by_history: {
            only_keys(args, {"history"}, fn);
            auto it = args.find("history");
            if (it == args.end()) {
                throw MalformedParametersError(std::string(fn) + ": missing parameter 'history'");
            }
            if (!it->is_array()) {
                throw MalformedParametersError(std::string(fn) + ": 'history' must be an array");
            }
            RecommendParams p;
            for (const auto& v : *it) {
                if (!v.is_string()) {
                    throw MalformedParametersError(std::string(fn) +
                                                   ": 'history' entries must be strings");
                }
                p.history.push_back(v.get<std::string>());
            }
            return {*kind, std::move(p)};
        }
        case FunctionKind::add_product_review:
            only_keys(args, {"review_text"}, fn);
            return {*kind, ReviewParams{string_field(args, "review_text", fn)}};
        case FunctionKind::respond:
            only_keys(args, {"message"}, fn);
            return {*kind, RespondParams{string_field(args, "message", fn)}};
        case FunctionKind::stop:
            only_keys(args, {}, fn);
            return {*kind, StopParams{}};
    }
    throw UnknownFunctionError("unknown function '" + call.name + "'");
}

nlohmann::json result_to_json(const FunctionResult& result, const corpus::Catalog& catalog) {
    nlohmann::json j = {{"function", to_string(result.kind)}};
    std::visit(
        [&](const auto& payload) {
            using T = std::decay_t<decltype(payload)>;
            if constexpr (std::is_same_v<T, RankedList>) {
                auto items = nlohmann::json::array();
                for (const auto& item : payload.items) {
                    nlohmann::json entry = {{"rank", item.rank}};
                    if (const auto* p = catalog.find(item.product_id)) {
                        entry["product"] = *p;
                    } else {
                        entry["product"] = {{"product_id", item.product_id}};
                    }
                    items.push_back(std::move(entry));
                }
                j["results"] = std::move(items);
            } else if constexpr (std::is_same_v<T, ReviewAck>) {
                j["status"] = "review posted";
            } else if constexpr (std::is_same_v<T, UserMessage>) {
                j["message"] = payload.text;
            } else {
                j["status"] = "stopped";
            }
        },
        result.payload);
    return j;
}

// --- recommender ----------------------------------------------------------

std::uint64_t CoocModel::transition(const corpus::ProductId& from, const corpus::ProductId& to) const {
    auto it = transitions_.find(from);
    if (it == transitions_.end()) return 0;
    auto jt = it->second.find(to);
    return jt == it->second.end() ? 0 : jt->second;
}

std::uint64_t CoocModel::popularity_of(const corpus::ProductId& id) const {
    auto it = popularity_.find(id);
    return it == popularity_.end() ? 0 : it->second;
}

std::vector<retrieval::ScoredProduct> CoocModel::recommend(
    const std::vector<corpus::ProductId>& known_history, std::size_t k) const {
    if (known_history.empty()) {
        throw InvalidArgument("CoocModel::recommend: empty history");
    }
    const std::set<corpus::ProductId> seen(known_history.begin(), known_history.end());
    const auto& last = known_history.back();
    struct Candidate {
        const corpus::ProductId* id;
        std::uint64_t transition;
        std::uint64_t popularity;
    };
    std::vector<Candidate> candidates;
    for (const auto& id : eligible_) {
        if (seen.count(id)) continue;
        candidates.push_back({&id, transition(last, id), popularity_of(id)});
    }
    const auto take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                          if (a.transition != b.transition) return a.transition > b.transition;
                          if (a.popularity != b.popularity) return a.popularity > b.popularity;
                          return *a.id < *b.id;
                      });
    std::vector<retrieval::ScoredProduct> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back({*candidates[i].id, static_cast<double>(candidates[i].transition)});
    }
    return out;
}

nlohmann::json CoocModel::to_json() const {
    nlohmann::json transitions = nlohmann::json::object();
    for (const auto& [from, row] : transitions_) transitions[from] = row;
    return {{"transitions", transitions},
            {"popularity", popularity_},
            {"eligible", eligible_}};
}

CoocModel CoocModel::from_json(const nlohmann::json& j) {
    CoocModel m;
    m.transitions_ = j.at("transitions").get<Counts>();
    m.popularity_ = j.at("popularity").get<std::map<corpus::ProductId, std::uint64_t>>();
    m.eligible_ = j.at("eligible").get<std::set<corpus::ProductId>>();
    return m;
}

CoocModel train_cooc(const std::vector<std::vector<corpus::ProductId>>& sequences,
                     const corpus::Catalog& catalog) {
    CoocModel m;
    for (const auto& seq : sequences) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (!catalog.find(seq[i])) {
                throw ValidationError("train_cooc: unknown product '" + seq[i] + "'");
            }
            ++m.popularity_[seq[i]];
            m.eligible_.insert(seq[i]);
            if (i + 1 < seq.size()) ++m.transitions_[seq[i]][seq[i + 1]];
        }
    }
    return m;
}

std::vector<std::vector<corpus::ProductId>> training_sequences(
    const std::vector<corpus::UserRecord>& users) {
    std::vector<std::vector<corpus::ProductId>> out;
    out.reserve(users.size());
    for (const auto& u : users) {
        std::vector<corpus::ProductId> seq;
        for (const auto& b : u.history) seq.push_back(b.product_id);
        for (const auto& b : u.train) seq.push_back(b.product_id);
        out.push_back(std::move(seq));
    }
    return out;
}

PrecomputedRecommender PrecomputedRecommender::load(const std::filesystem::path& path,
                                                    const corpus::Catalog& catalog) {
    PrecomputedRecommender r;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t) {
        auto from = j.at("product_id").get<std::string>();
        auto scores = j.at("scores").get<std::map<std::string, double>>();
        if (!catalog.find(from)) throw ValidationError("precomputed scores: unknown product '" + from + "'");
        r.eligible_.insert(from);
        for (const auto& [id, _] : scores) {
            if (!catalog.find(id)) throw ValidationError("precomputed scores: unknown product '" + id + "'");
            r.eligible_.insert(id);
        }
        r.scores_[from] = std::move(scores);
    });
    return r;
}

std::vector<retrieval::ScoredProduct> PrecomputedRecommender::recommend(
    const std::vector<corpus::ProductId>& known_history, std::size_t k) const {
    if (known_history.empty()) {
        throw InvalidArgument("PrecomputedRecommender::recommend: empty history");
    }
    const std::set<corpus::ProductId> seen(known_history.begin(), known_history.end());
    const std::map<corpus::ProductId, double>* row = nullptr;
    if (auto it = scores_.find(known_history.back()); it != scores_.end()) row = &it->second;
    std::vector<retrieval::ScoredProduct> candidates;
    for (const auto& id : eligible_) {
        if (seen.count(id)) continue;
        double s = 0.0;
        if (row) {
            if (auto jt = row->find(id); jt != row->end()) s = jt->second;
        }
        candidates.push_back({id, s});
    }
    const auto take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), [](const auto& a, const auto& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.product_id < b.product_id;
                      });
    candidates.resize(take);
    return candidates;
}

// --- environment ----------------------------------------------------------

World World::build(const corpus::DatasetBundle& bundle) {
    World w;
    auto catalog = std::make_shared<const corpus::Catalog>(bundle.catalog);
    w.index = std::make_shared<const retrieval::Bm25Index>(retrieval::Bm25Index::build(*catalog));
    w.recommender =
        std::make_shared<const CoocModel>(train_cooc(training_sequences(bundle.users), *catalog));
    w.catalog = std::move(catalog);
    return w;
}

EnvState::EnvState(World world, std::string user_id)
    : world_(std::move(world)), user_id_(std::move(user_id)) {
    if (!world_.catalog || !world_.index || !world_.recommender) {
        throw InvalidArgument("EnvState: world is not fully initialized");
    }
}

namespace {

RankedList to_ranked(const std::vector<retrieval::ScoredProduct>& scored) {
    RankedList list;
    list.items.reserve(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        list.items.push_back({i + 1, scored[i].product_id, scored[i].score});
    }
    return list;
}

}  // namespace

RankedList EnvState::search_product_by_query(const std::string& query) const {
    if (retrieval::tokenize(query).empty()) {
        throw MalformedParametersError("search_product_by_query: query has no searchable terms");
    }
    return to_ranked(world_.index->query_top_k(query, kResultListSize));
}

RankedList EnvState::get_recommendations_by_history(
    const std::vector<corpus::ProductId>& history) const {
    if (history.empty()) {
        throw MalformedParametersError("get_recommendations_by_history: empty history");
    }
    std::vector<corpus::ProductId> known;
    for (const auto& id : history) {
        if (world_.catalog->find(id)) known.push_back(id);
    }
    if (known.empty()) {
        throw MalformedParametersError("get_recommendations_by_history: no known product ids");
    }
    return to_ranked(world_.recommender->recommend(known, kResultListSize));
}

ReviewAck EnvState::add_product_review(const std::string& review_text) {
    if (review_text.empty()) {
        throw MalformedParametersError("add_product_review: empty review_text");
    }
    posted_reviews_.push_back({user_id_, review_text, dispatched_});
    return {posted_reviews_.size() - 1};
}

UserMessage EnvState::respond(const std::string& message) const { return {message}; }

FunctionResult EnvState::dispatch(const FunctionCall& call) {
    auto validated = validate_schema(call);
    FunctionResult result{validated.kind, Termination{}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SearchParams>) {
                result.payload = search_product_by_query(p.query);
            } else if constexpr (std::is_same_v<T, RecommendParams>) {
                result.payload = get_recommendations_by_history(p.history);
            } else if constexpr (std::is_same_v<T, ReviewParams>) {
                result.payload = add_product_review(p.review_text);
            } else if constexpr (std::is_same_v<T, RespondParams>) {
                result.payload = respond(p.message);
            } else {
                result.payload = Termination{};
            }
        },
        validated.params);
    ++dispatched_;
    return result;
}

nlohmann::json tool_schemas(bool include_dialogue_tools) {
    auto string_param = [](const char* name, const char* description) {
        return nlohmann::json{
            {"type", "object"},
            {"properties", {{name, {{"type", "string"}, {"description", description}}}}},
            {"required", {name}}};
    };
    auto tools = nlohmann::json::array();
    tools.push_back({{"name", "search_product_by_query"},
                     {"description",
                      "Search the product database with a text query; returns the 10 most "
                      "similar products with their details."},
                     {"parameters", string_param("query", "Search query text.")}});
    tools.push_back(
        {{"name", "get_recommendations_by_history"},
         {"description",
          "Recommend 10 products given a sequence of product IDs (parent ASINs) the user "
          "interacted with, most recent last."},
         {"parameters",
          {{"type", "object"},
           {"properties",
            {{"history",
              {{"type", "array"},
               {"items", {{"type", "string"}}},
               {"description", "Product IDs, oldest first."}}}}},
           {"required", {"history"}}}}});
    tools.push_back({{"name", "add_product_review"},
                     {"description", "Post a review for the product the user purchased."},
                     {"parameters", string_param("review_text", "Full review text.")}});
    if (include_dialogue_tools) {
        tools.push_back({{"name", "respond"},
                         {"description", "Send a message to the user and wait for the reply."},
                         {"parameters", string_param("message", "Message to the user.")}});
        tools.push_back({{"name", "stop"},
                         {"description", "End the task."},
                         {"parameters", {{"type", "object"}, {"properties", nlohmann::json::object()}}}});
    }
    return tools;
}

}  // namespace pwab::webenv

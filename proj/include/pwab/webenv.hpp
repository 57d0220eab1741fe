#pragma once
// The abstracted Web environment: five callable functions, parameter-schema
// validation, dispatch, and the recommender behind
// get_recommendations_by_history.
//
// Parameter schemas:
//   search_product_by_query         {"query": string}
//   get_recommendations_by_history  {"history": [string, ...]}
//   add_product_review              {"review_text": string}
//   respond                         {"message": string}
//   stop                            {}

#include <pwab/corpus.hpp>
#include <pwab/retrieval.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pwab::webenv {

enum class FunctionKind {
    search_product_by_query,
    get_recommendations_by_history,
    add_product_review,
    respond,
    stop,
};

inline constexpr FunctionKind kAllFunctionKinds[] = {
    FunctionKind::search_product_by_query, FunctionKind::get_recommendations_by_history,
    FunctionKind::add_product_review, FunctionKind::respond, FunctionKind::stop};

std::string_view to_string(FunctionKind kind);
std::optional<FunctionKind> parse_function_kind(std::string_view name);
bool is_task_tool(FunctionKind kind);
FunctionKind task_tool_for(corpus::TaskKind task);

inline constexpr std::size_t kResultListSize = 10;

// Raw (name, arguments) pair as produced by an agent; validated by dispatch.
struct FunctionCall {
    std::string name;
    nlohmann::json arguments = nlohmann::json::object();

    bool operator==(const FunctionCall&) const = default;

    static FunctionCall search(std::string query);
    static FunctionCall recommend(std::vector<corpus::ProductId> history);
    static FunctionCall review(std::string text);
    static FunctionCall respond(std::string message);
    static FunctionCall stop();
};

void to_json(nlohmann::json& j, const FunctionCall& call);
void from_json(const nlohmann::json& j, FunctionCall& call);

class UnknownFunctionError : public Error {
public:
    using Error::Error;
};

class MalformedParametersError : public Error {
public:
    using Error::Error;
};

struct SearchParams { std::string query; };
struct RecommendParams { std::vector<corpus::ProductId> history; };
struct ReviewParams { std::string review_text; };
struct RespondParams { std::string message; };
struct StopParams {};

using Params = std::variant<SearchParams, RecommendParams, ReviewParams, RespondParams, StopParams>;

struct ValidatedCall {
    FunctionKind kind;
    Params params;
};

// Schema check only (shape and types; extra keys rejected). Throws
// UnknownFunctionError or MalformedParametersError.
ValidatedCall validate_schema(const FunctionCall& call);

struct RankedProduct {
    std::size_t rank = 0;  // 1-based
    corpus::ProductId product_id;
    double score = 0.0;

    bool operator==(const RankedProduct&) const = default;
};

struct RankedList { std::vector<RankedProduct> items; };
struct ReviewAck { std::size_t review_index = 0; };
struct UserMessage { std::string text; };
struct Termination {};

using Payload = std::variant<RankedList, ReviewAck, UserMessage, Termination>;

struct FunctionResult {
    FunctionKind kind;
    Payload payload;

    const RankedList* ranked() const { return std::get_if<RankedList>(&payload); }
};

// Observation shown to the agent; ranked lists carry full product details.
nlohmann::json result_to_json(const FunctionResult& result, const corpus::Catalog& catalog);

// ---------------------------------------------------------------------------
// Recommendation

class Recommender {
public:
    virtual ~Recommender() = default;
    // `known_history` holds catalog ids only, in input order, non-empty.
    // Returns at most `k` products, none of them in known_history.
    virtual std::vector<retrieval::ScoredProduct> recommend(
        const std::vector<corpus::ProductId>& known_history, std::size_t k) const = 0;
};

// Order-1 co-occurrence counts over training sequences.
class CoocModel final : public Recommender {
public:
    using Counts = std::map<corpus::ProductId, std::map<corpus::ProductId, std::uint64_t>>;

    const Counts& transitions() const noexcept { return transitions_; }
    const std::map<corpus::ProductId, std::uint64_t>& popularity() const noexcept { return popularity_; }
    const std::set<corpus::ProductId>& eligible() const noexcept { return eligible_; }

    std::uint64_t transition(const corpus::ProductId& from, const corpus::ProductId& to) const;
    std::uint64_t popularity_of(const corpus::ProductId& id) const;

    // Candidates = eligible \ history, keyed by (transition from the last
    // history item desc, popularity desc, product_id asc).
    std::vector<retrieval::ScoredProduct> recommend(const std::vector<corpus::ProductId>& known_history,
                                                    std::size_t k) const override;

    nlohmann::json to_json() const;
    static CoocModel from_json(const nlohmann::json& j);

    bool operator==(const CoocModel& other) const {
        return transitions_ == other.transitions_ && popularity_ == other.popularity_ &&
               eligible_ == other.eligible_;
    }

private:
    friend CoocModel train_cooc(const std::vector<std::vector<corpus::ProductId>>&,
                                const corpus::Catalog&);
    Counts transitions_;
    std::map<corpus::ProductId, std::uint64_t> popularity_;
    std::set<corpus::ProductId> eligible_;
};

// Throws ValidationError when a sequence references an id outside the catalog.
CoocModel train_cooc(const std::vector<std::vector<corpus::ProductId>>& sequences,
                     const corpus::Catalog& catalog);

// Per-user training sequence: history ++ train (test held out).
std::vector<std::vector<corpus::ProductId>> training_sequences(
    const std::vector<corpus::UserRecord>& users);

// Scores read from a file emulating an external model. One JSON object per
// line: {"product_id": last item, "scores": {"<id>": number, ...}}.
// Ranking: score desc then product_id asc, restricted to ids that appear
// anywhere in the file, history excluded.
class PrecomputedRecommender final : public Recommender {
public:
    static PrecomputedRecommender load(const std::filesystem::path& path,
                                       const corpus::Catalog& catalog);

    std::vector<retrieval::ScoredProduct> recommend(const std::vector<corpus::ProductId>& known_history,
                                                    std::size_t k) const override;

private:
    std::map<corpus::ProductId, std::map<corpus::ProductId, double>> scores_;
    std::set<corpus::ProductId> eligible_;
};

// ---------------------------------------------------------------------------
// Environment

// Immutable, shareable across episodes.
struct World {
    std::shared_ptr<const corpus::Catalog> catalog;
    std::shared_ptr<const retrieval::Bm25Index> index;
    std::shared_ptr<const Recommender> recommender;

    static World build(const corpus::DatasetBundle& bundle);
};

struct PostedReview {
    std::string user_id;
    std::string review_text;
    std::size_t step = 0;

    bool operator==(const PostedReview&) const = default;
};

// Per-episode state; copying forks the posted-review log.
class EnvState {
public:
    EnvState(World world, std::string user_id);

    const World& world() const noexcept { return world_; }
    const corpus::Catalog& catalog() const { return *world_.catalog; }
    const std::string& user_id() const noexcept { return user_id_; }
    const std::vector<PostedReview>& posted_reviews() const noexcept { return posted_reviews_; }
    std::size_t dispatched() const noexcept { return dispatched_; }

    // Validates then routes; throws UnknownFunctionError /
    // MalformedParametersError without touching state.
    FunctionResult dispatch(const FunctionCall& call);

    RankedList search_product_by_query(const std::string& query) const;
    RankedList get_recommendations_by_history(const std::vector<corpus::ProductId>& history) const;
    ReviewAck add_product_review(const std::string& review_text);
    UserMessage respond(const std::string& message) const;

private:
    World world_;
    std::string user_id_;
    std::vector<PostedReview> posted_reviews_;
    std::size_t dispatched_ = 0;
};

// Function descriptions with JSON-schema parameters, for agent prompts.
nlohmann::json tool_schemas(bool include_dialogue_tools);

}  // namespace pwab::webenv

#pragma once
// Metrics, episode runners for both tracks, user simulators, aggregation and
// the profile-consistency evaluations.

#include <pwab/agent.hpp>
#include <pwab/memory.hpp>
#include <pwab/webenv.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pwab::eval {

// ---------------------------------------------------------------------------
// Metrics

// 1 - (r-1)/10 for r <= 10, else 0. nullopt (absent) scores 0.
double rank_score(std::optional<std::size_t> rank);
// First 1-based position of `target` in the list.
std::optional<std::size_t> target_rank(const webenv::RankedList& list, const corpus::ProductId& target);

// A call the episode chose to grade, with whether dispatch accepted it and the
// result it produced.
struct GradedCall {
    webenv::FunctionCall call;
    bool accepted = false;
    std::optional<webenv::FunctionResult> result;
};

// 1 iff the call is the task's tool and dispatch accepted its parameters.
int function_accuracy(const std::optional<GradedCall>& graded, corpus::TaskKind task);

// Cosine similarity of the two texts' embeddings, clamped to [0, 1].
double review_similarity(std::string_view posted, std::string_view reference,
                         const retrieval::Embedder& embedder);

// 0 unless function_accuracy is 1; then the rank score of the target
// (search, recommendation) or the review similarity.
double result_accuracy(const std::optional<GradedCall>& graded, const corpus::Instruction& instruction,
                       const retrieval::Embedder& embedder);

// Rank score of the best list among `lists`; 0 when empty.
double outcome_accuracy(const std::vector<webenv::RankedList>& lists, const corpus::ProductId& target);

double ndcg_at_k(const std::vector<corpus::ProductId>& ranked, const std::set<corpus::ProductId>& positives,
                 std::size_t k);
double recall_at_k(const std::vector<corpus::ProductId>& ranked,
                   const std::set<corpus::ProductId>& positives, std::size_t k);

// ---------------------------------------------------------------------------
// Episodes

enum class Termination { stop, max_steps, single_shot, parse_failure };

std::string_view to_string(Termination t);
Termination parse_termination(std::string_view text);

enum class GradingRule { last_call, best_call };

struct TranscriptStep {
    std::string actor;  // "agent", "environment" or "simulator"
    std::string text;   // raw agent output, observation JSON, or user message
    std::optional<webenv::FunctionCall> call;  // agent steps only
    bool parse_failure = false;
    bool accepted = false;
    std::string error;  // dispatch rejection message
};

struct EpisodeRecord {
    std::string instruction_id;
    std::string user_id;
    corpus::TaskKind task_kind = corpus::TaskKind::search;
    agent::Track track = agent::Track::single;
    std::vector<TranscriptStep> transcript;
    std::size_t steps = 0;
    std::optional<webenv::FunctionCall> graded_call;
    int function_acc = 0;
    double result_acc = 0.0;           // per the configured grading rule
    double last_call_result_acc = 0.0;
    double best_call_result_acc = 0.0;
    double outcome_acc = 0.0;
    // Result accuracy of every task-tool call in order, for per-step plots.
    std::vector<double> per_call_result_acc;
    Termination termination = Termination::single_shot;
    bool failed = false;  // provider or simulator failure; excluded from aggregates
    std::string error;
};

nlohmann::json to_json(const EpisodeRecord& record);
EpisodeRecord episode_from_json(const nlohmann::json& j);

struct EpisodeOptions {
    std::size_t max_steps = 10;
    agent::PromptVariant variant = agent::PromptVariant::plain;
    agent::Sampling sampling;
    GradingRule grading = GradingRule::last_call;
};

class Simulator {
public:
    virtual ~Simulator() = default;
    // One user message answering the agent's latest respond call.
    virtual std::string reply(const corpus::Instruction& instruction,
                              const std::vector<agent::TranscriptTurn>& transcript,
                              const std::string& agent_message) = 0;
};

// Replays canned replies; once they run out, returns `fallback` or throws
// QueueExhaustedError.
class ScriptedSimulator final : public Simulator {
public:
    explicit ScriptedSimulator(std::vector<std::string> replies,
                               std::optional<std::string> fallback = std::nullopt);
    std::string reply(const corpus::Instruction& instruction,
                      const std::vector<agent::TranscriptTurn>& transcript,
                      const std::string& agent_message) override;

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    std::optional<std::string> fallback_;
};

// Simulated user backed by a text-generation policy and the simulator
// prompt bound with the user's profile and the target product.
class PolicySimulator final : public Simulator {
public:
    PolicySimulator(std::shared_ptr<agent::Policy> policy, const corpus::DatasetBundle& bundle,
                    agent::Sampling sampling = {});
    std::string reply(const corpus::Instruction& instruction,
                      const std::vector<agent::TranscriptTurn>& transcript,
                      const std::string& agent_message) override;

    static std::string system_prompt(const corpus::Instruction& instruction,
                                     const corpus::DatasetBundle& bundle);

private:
    std::shared_ptr<agent::Policy> policy_;
    const corpus::DatasetBundle& bundle_;
    agent::Sampling sampling_;
};

EpisodeRecord run_single_turn(agent::Policy& policy, const corpus::Instruction& instruction,
                              webenv::EnvState& env, std::string_view memory_text,
                              const retrieval::Embedder& embedder, const EpisodeOptions& options = {});

EpisodeRecord run_multi_turn(agent::Policy& policy, Simulator& simulator,
                             const corpus::Instruction& instruction, webenv::EnvState& env,
                             std::string_view memory_text, const retrieval::Embedder& embedder,
                             const EpisodeOptions& options = {});

// Calls fn(i) for i in [0, n) on up to `jobs` threads; results by index.
std::vector<EpisodeRecord> run_parallel(std::size_t n, std::size_t jobs,
                                        const std::function<EpisodeRecord(std::size_t)>& fn);

// Memory text for an instruction under a strategy. Banks are built up front,
// so one provider can be shared by concurrent episodes.
class MemoryProvider {
public:
    MemoryProvider(const corpus::DatasetBundle& bundle, std::shared_ptr<const retrieval::Embedder> embedder,
                   memory::Strategy strategy, memory::RetrievalConfig config, std::uint64_t seed);

    std::string memory_for(const corpus::Instruction& instruction) const;
    memory::Strategy strategy() const noexcept { return strategy_; }

private:
    std::shared_ptr<const retrieval::Embedder> embedder_;
    memory::Strategy strategy_;
    memory::RetrievalConfig config_;
    std::uint64_t seed_;
    std::map<std::string, memory::MemoryBank> banks_;
};

// ---------------------------------------------------------------------------
// Aggregation

struct ReportRow {
    std::size_t episodes = 0;
    double function_acc = 0.0;
    double result_acc = 0.0;
    double outcome_acc = 0.0;
    double steps = 0.0;
};

struct Report {
    std::map<corpus::TaskKind, ReportRow> per_kind;  // kinds without episodes omitted
    ReportRow overall;                                // episode-weighted
    std::size_t failed = 0;
};

// Throws InvalidArgument on empty input.
Report aggregate(const std::vector<EpisodeRecord>& episodes);
nlohmann::json to_json(const Report& report);
std::string render_table(const Report& report, std::string_view title = {});

// ---------------------------------------------------------------------------
// Profile consistency

struct MatchTrial {
    std::string profile;
    std::vector<std::string> candidates;  // candidate behavior histories
    std::size_t true_index = 0;
};

using Chooser = std::function<std::size_t(const MatchTrial&)>;

// Trials come with the true history at index 0; each trial's candidates are
// shuffled under `seed` before the chooser sees them. Returns top-1 accuracy.
double profile_behavior_match_task(const std::vector<MatchTrial>& trials, const Chooser& chooser,
                                   std::uint64_t seed);

// One trial per user: the user's profile against their own history and
// `negatives` other users' histories (drawn under `seed`).
std::vector<MatchTrial> build_match_trials(const corpus::DatasetBundle& bundle, std::size_t negatives,
                                           std::uint64_t seed);

struct RankTrial {
    std::string profile;
    std::vector<corpus::ProductId> items;  // shuffled
    std::set<corpus::ProductId> positives;
};

using Ranker = std::function<std::vector<corpus::ProductId>(const RankTrial&)>;

struct RankMetrics {
    double ndcg = 0.0;
    double recall = 0.0;
};

// Shuffles positives+negatives under `seed`, asks the ranker for an order and
// scores the top `k`. Throws InvalidArgument when the ranking is not a
// permutation of the items.
RankMetrics profile_product_rank_task(const std::string& profile,
                                      const std::vector<corpus::ProductId>& positives,
                                      const std::vector<corpus::ProductId>& negatives,
                                      const Ranker& ranker, std::uint64_t seed, std::size_t k = 5);

// Choosers and rankers that ask a policy; output parsed leniently (first
// integer / ids in order of appearance).
Chooser policy_chooser(std::shared_ptr<agent::Policy> policy);
Ranker policy_ranker(std::shared_ptr<agent::Policy> policy, const corpus::Catalog& catalog);

}  // namespace pwab::eval

#pragma once
// Alignment data: heuristic SFT labels, candidate sampling and scoring,
// best/worst preference pairs, the DPO objective and its gradient, and the
// line-delimited dataset files consumed by an external trainer.

#include <pwab/agent.hpp>
#include <pwab/memory.hpp>
#include <pwab/webenv.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pwab::align {

// Model input x.
struct AlignInput {
    std::string instruction_id;
    std::string instruction;
    std::string memory;  // serialized task memory
    webenv::FunctionKind function = webenv::FunctionKind::search_product_by_query;

    bool operator==(const AlignInput&) const = default;
};

struct SftExample {
    AlignInput input;
    nlohmann::json label;  // arguments object for `function`
    bool fallback = false;  // recommendation label not drawn from same-category memory

    bool operator==(const SftExample&) const = default;
};

struct SftConfig {
    std::size_t max_history = 5;
    agent::Sampling query_sampling{0.0, 64};
};

// search: a query generated by `query_policy` (first line, trimmed; the
// instruction text itself when the policy returns nothing usable).
// recommendation: same-category memory product ids, newest first, capped;
// falls back to the newest ids of any category.
// review: the reference review text verbatim.
SftExample build_sft_label(const corpus::Instruction& instruction, const memory::TaskMemory& task_memory,
                           const memory::MemoryBank& bank, const corpus::Catalog& catalog,
                           agent::Policy* query_policy, const SftConfig& config = {});

struct Candidate {
    std::string raw;
    std::optional<nlohmann::json> arguments;  // nullopt: failed to parse
    std::size_t sample_index = 0;

    bool failed() const { return !arguments.has_value(); }
};

// n completions; candidates whose arguments repeat an earlier one are
// dropped; unparseable ones are kept as failed candidates.
std::vector<Candidate> sample_candidates(agent::Policy& policy, const std::vector<agent::ChatMessage>& prompt,
                                         webenv::FunctionKind function, int n, const agent::Sampling& sampling);

// Parses one completion as arguments for `function`: a full tool call whose
// name matches, or a bare arguments object.
std::optional<nlohmann::json> parse_candidate(std::string_view text, webenv::FunctionKind function);

struct ScoredCandidate {
    Candidate candidate;
    double score = 0.0;
};

// Result accuracy of dispatching `arguments` on a fresh environment.
double score_arguments(const nlohmann::json& arguments, webenv::FunctionKind function,
                       const corpus::Instruction& instruction, const webenv::World& world,
                       const retrieval::Embedder& embedder);

std::vector<ScoredCandidate> score_candidates(const std::vector<Candidate>& candidates,
                                              webenv::FunctionKind function,
                                              const corpus::Instruction& instruction,
                                              const webenv::World& world, const retrieval::Embedder& embedder);

struct PreferenceRecord {
    AlignInput input;
    nlohmann::json p_best;
    nlohmann::json p_worst;
    double score_best = 0.0;
    double score_worst = 0.0;

    bool operator==(const PreferenceRecord&) const = default;
};

// Argmax / argmin by score, ties to the earliest sample; nullopt when all
// scores are equal (including a single candidate).
std::optional<std::pair<std::size_t, std::size_t>> select_preference_pair(
    const std::vector<ScoredCandidate>& scored);

// Failed candidates have no arguments; they are stored as an empty object.
std::optional<PreferenceRecord> make_preference_record(const AlignInput& input,
                                                       const std::vector<ScoredCandidate>& scored);

struct DpoPoint {
    double policy_best = 0.0;  // log pi_theta(p_b | x)
    double policy_worst = 0.0;
    double ref_best = 0.0;     // log pi_ref(p_b | x)
    double ref_worst = 0.0;
    double beta = 0.1;
};

struct DpoGrad {
    double d_policy_best = 0.0;
    double d_policy_worst = 0.0;
};

// -log sigmoid(beta * ((pb - rb) - (pw - rw))). Throws InvalidArgument on
// non-finite input or beta <= 0.
double dpo_loss(const DpoPoint& point);
DpoGrad dpo_grad(const DpoPoint& point);
// Mean of per-point losses; throws on an empty set.
double dpo_loss_mean(const std::vector<DpoPoint>& points);

nlohmann::json to_json(const AlignInput& input);
AlignInput input_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SftExample& example);
SftExample sft_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PreferenceRecord& record);
PreferenceRecord preference_from_json(const nlohmann::json& j);

// sft.jsonl and preference.jsonl under `dir`. The preference writer rejects
// records with score_best <= score_worst (InvalidArgument) before writing.
void export_alignment_datasets(const std::vector<SftExample>& sft,
                               const std::vector<PreferenceRecord>& preferences,
                               const std::filesystem::path& dir);
std::vector<SftExample> read_sft(const std::filesystem::path& path);
std::vector<PreferenceRecord> read_preferences(const std::filesystem::path& path);

}  // namespace pwab::align

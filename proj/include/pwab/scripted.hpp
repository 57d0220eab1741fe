#pragma once
// Offline agents: replayable transcript files, an oracle agent that knows
// each instruction's target, and a rule-based agent that only reads its
// prompt.

#include <pwab/agent.hpp>
#include <pwab/webenv.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pwab::scripted {

// Canned agent outputs (and simulator replies) for one instruction.
struct Script {
    std::vector<std::string> responses;
    std::vector<std::string> simulator;

    bool operator==(const Script&) const = default;
};

// instruction_id -> script
using ScriptBook = std::map<std::string, Script>;

// One JSON object per line: {"instruction_id", "responses": [...], "simulator": [...]}.
ScriptBook load_scripts(const std::filesystem::path& path);
void save_scripts(const ScriptBook& book, const std::filesystem::path& path);

// Rendered tool call, {"name": ..., "arguments": {...}}.
std::string render_call(const webenv::FunctionCall& call);

// Best call available with full knowledge of the target:
//   search          the query among (title, title tokens) ranking the target highest
//   recommendation  a history that puts the target first, when any does
//   review          the reference review text
webenv::FunctionCall oracle_call(const corpus::Instruction& instruction, const webenv::World& world);

// Recommendations never repeat history items, so a history made of every
// product ranked above the target, followed by the anchor product, lifts the
// target to rank 1. Picks the anchor with the shortest such history;
// nullopt when no anchor ranks the target at all.
std::optional<std::vector<corpus::ProductId>> rank_one_history(const corpus::ProductId& target,
                                                              const webenv::World& world);

// Oracle scripts for every instruction; multi-turn scripts end with stop.
ScriptBook oracle_scripts(const corpus::DatasetBundle& bundle, const webenv::World& world,
                          agent::Track track);

// Rule-based agent: recommends from product ids found in its memory block
// when asked for a recommendation, posts the request text for reviews,
// searches with the request text otherwise, and stops once it has acted.
class HeuristicPolicy final : public agent::Policy {
public:
    using Policy::complete;
    std::vector<std::string> complete(const std::vector<agent::ChatMessage>& messages, int n,
                                      const agent::Sampling& sampling) override;

    static webenv::FunctionCall decide(const std::vector<agent::ChatMessage>& messages);
};

}  // namespace pwab::scripted

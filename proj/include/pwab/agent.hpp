#pragma once
// Agent-side plumbing: chat messages, text-generation policies (scripted and
// HTTP provider), prompt assembly for both tracks, and tool-call parsing.

#include <pwab/webenv.hpp>

#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pwab::agent {

enum class Role { system, user, assistant, tool };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);  // throws ParseError

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);

struct Sampling {
    double temperature = 0.0;
    int max_tokens = 512;
};

enum class PromptVariant { plain, react };

struct PolicyConfig {
    std::string endpoint;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;  // read from the environment by callers, never hard-coded
    Sampling sampling;
    int n_samples = 1;    // beam width / number of candidates
    PromptVariant variant = PromptVariant::plain;
    int max_attempts = 3;
    int timeout_seconds = 120;
};

class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

class QueueExhaustedError : public Error {
public:
    using Error::Error;
};

// A text-generation policy. Implementations are request/response units;
// concurrent use is governed by the wrapper below, not by the policy.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::vector<std::string> complete(const std::vector<ChatMessage>& messages, int n,
                                              const Sampling& sampling) = 0;
    std::vector<std::string> complete(const std::vector<ChatMessage>& messages, int n = 1) {
        return complete(messages, n, Sampling{});
    }
};

// Replays queued responses in order, one per requested candidate.
class ScriptedPolicy final : public Policy {
public:
    ScriptedPolicy() = default;
    explicit ScriptedPolicy(std::vector<std::string> responses);

    void push(std::string response);
    std::size_t remaining() const;
    // Messages received by each complete() call, for inspection in tests.
    const std::vector<std::vector<ChatMessage>>& requests() const noexcept { return requests_; }

    using Policy::complete;
    std::vector<std::string> complete(const std::vector<ChatMessage>& messages, int n,
                                      const Sampling& sampling) override;

private:
    mutable std::mutex mutex_;
    std::deque<std::string> queue_;
    std::vector<std::vector<ChatMessage>> requests_;
};

// Chat-completions over HTTP: POST {model, messages, temperature, n,
// max_tokens}; reads choices[i].message.content.
class HttpChatPolicy final : public Policy {
public:
    explicit HttpChatPolicy(PolicyConfig config);

    const PolicyConfig& config() const noexcept { return config_; }

    using Policy::complete;
    std::vector<std::string> complete(const std::vector<ChatMessage>& messages, int n,
                                      const Sampling& sampling) override;

    static nlohmann::json request_body(const std::string& model,
                                       const std::vector<ChatMessage>& messages, int n,
                                       const Sampling& sampling);
    static std::vector<std::string> parse_response(const nlohmann::json& body);

private:
    PolicyConfig config_;
};

// Caps the number of in-flight completions across threads sharing `inner`.
class InflightLimiter final : public Policy {
public:
    InflightLimiter(std::shared_ptr<Policy> inner, std::ptrdiff_t max_in_flight);

    using Policy::complete;
    std::vector<std::string> complete(const std::vector<ChatMessage>& messages, int n,
                                      const Sampling& sampling) override;

private:
    std::shared_ptr<Policy> inner_;
    std::counting_semaphore<1024> slots_;
};

// ---------------------------------------------------------------------------
// Tool-call parsing

struct ParseFailure {
    std::string raw;

    bool operator==(const ParseFailure&) const = default;
};

using AgentAction = std::variant<webenv::FunctionCall, ParseFailure>;

// First balanced, well-formed JSON object at or after `from`; returns the
// object and its start offset.
std::optional<std::pair<nlohmann::json, std::size_t>> extract_first_json_object(std::string_view text,
                                                                                std::size_t from = 0);

// plain: first object carrying {"name": string, "arguments": object}.
// react: the first such object after the first "Action:" marker.
// Never throws.
AgentAction parse_tool_call(std::string_view text, PromptVariant variant = PromptVariant::plain);

// ---------------------------------------------------------------------------
// Prompt assembly

enum class Track { single, multi };

std::string_view to_string(Track track);

inline constexpr std::string_view kNoMemoryMarker = "No memory available.";

struct TranscriptTurn {
    Role role;  // assistant (agent action), tool (function result) or user (simulator reply)
    std::string content;
};

// System prompt = track template with memory block and tool schemas; then the
// user's request; then (multi-turn) the running transcript.
std::vector<ChatMessage> assemble_prompt(Track track, const corpus::Instruction& instruction,
                                         std::string_view memory_text,
                                         const nlohmann::json& tool_schemas,
                                         const std::vector<TranscriptTurn>& transcript,
                                         PromptVariant variant = PromptVariant::plain);

}  // namespace pwab::agent

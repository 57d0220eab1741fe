#include <pwab/agent.hpp>
#include <pwab/benchgen.hpp>

namespace pwab::agent {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
    }
    return "user";
}

Role parse_role(std::string_view text) {
    if (text == "system") return Role::system;
    if (text == "user") return Role::user;
    if (text == "assistant") return Role::assistant;
    if (text == "tool") return Role::tool;
    throw ParseError("unknown chat role '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const ChatMessage& m) {
    j = {{"role", to_string(m.role)}, {"content", m.content}};
}

void from_json(const nlohmann::json& j, ChatMessage& m) {
    m.role = parse_role(j.at("role").get<std::string>());
    m.content = j.at("content").get<std::string>();
}

// --- scripted policy ------------------------------------------------------

ScriptedPolicy::ScriptedPolicy(std::vector<std::string> responses)
    : queue_(responses.begin(), responses.end()) {}

void ScriptedPolicy::push(std::string response) {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(response));
}

std::size_t ScriptedPolicy::remaining() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

std::vector<std::string> ScriptedPolicy::complete(const std::vector<ChatMessage>& messages, int n,
                                                  const Sampling&) {
    if (n < 1) throw InvalidArgument("complete: n must be >= 1");
    std::lock_guard lock(mutex_);
    if (queue_.size() < static_cast<std::size_t>(n)) {
        throw QueueExhaustedError("scripted policy: " + std::to_string(n) + " response(s) requested, " +
                                  std::to_string(queue_.size()) + " left");
    }
    requests_.push_back(messages);
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(std::move(queue_.front()));
        queue_.pop_front();
    }
    return out;
}

// --- parsing ----------------------------------------------------------------

namespace {

// Offset one past the brace matching text[open], or npos.
std::size_t match_brace(std::string_view text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

std::optional<webenv::FunctionCall> as_call(const nlohmann::json& obj) {
    auto name = obj.find("name");
    auto args = obj.find("arguments");
    if (name == obj.end() || !name->is_string()) return std::nullopt;
    if (args == obj.end() || !args->is_object()) return std::nullopt;
    return webenv::FunctionCall{name->get<std::string>(), *args};
}

}  // namespace

std::optional<std::pair<nlohmann::json, std::size_t>> extract_first_json_object(std::string_view text,
                                                                                std::size_t from) {
    for (auto open = text.find('{', from); open != std::string_view::npos;
         open = text.find('{', open + 1)) {
        const auto end = match_brace(text, open);
        if (end == std::string_view::npos) continue;
        auto parsed = nlohmann::json::parse(text.substr(open, end - open), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) {
            return std::make_pair(std::move(parsed), open);
        }
    }
    return std::nullopt;
}

AgentAction parse_tool_call(std::string_view text, PromptVariant variant) {
    std::size_t from = 0;
    if (variant == PromptVariant::react) {
        constexpr std::string_view marker = "Action:";
        const auto pos = text.find(marker);
        if (pos == std::string_view::npos) return ParseFailure{std::string(text)};
        from = pos + marker.size();
    }
    while (auto found = extract_first_json_object(text, from)) {
        if (auto call = as_call(found->first)) return *call;
        from = found->second + 1;
    }
    return ParseFailure{std::string(text)};
}

// --- prompt assembly --------------------------------------------------------

std::string_view to_string(Track track) { return track == Track::single ? "single" : "multi"; }

namespace {

constexpr std::string_view kPlainFormat =
    "Reply with exactly one JSON object of the form "
    "{\"name\": <function name>, \"arguments\": {<parameters>}}.";

constexpr std::string_view kReactFormat =
    "Think before acting and reply in the format:\n"
    "Thought: {some reasoning}\n"
    "Action: {some JSON format action argument}\n"
    "where the action is {\"name\": <function name>, \"arguments\": {<parameters>}}.";

}  // namespace

std::vector<ChatMessage> assemble_prompt(Track track, const corpus::Instruction& instruction,
                                         std::string_view memory_text,
                                         const nlohmann::json& tool_schemas,
                                         const std::vector<TranscriptTurn>& transcript,
                                         PromptVariant variant) {
    if (track == Track::single && !transcript.empty()) {
        throw InvalidArgument("assemble_prompt: single-turn prompts take no transcript");
    }
    const auto template_id = track == Track::single ? benchgen::TemplateId::single_turn_agent
                                                    : benchgen::TemplateId::multi_turn_agent;
    std::string system = benchgen::render_prompt(
        template_id,
        {{"MEMORY", memory_text.empty() ? std::string(kNoMemoryMarker) : std::string(memory_text)},
         {"FUNCTIONS", tool_schemas.dump(2)}});
    system += "\n";
    system += variant == PromptVariant::react ? kReactFormat : kPlainFormat;

    std::vector<ChatMessage> messages;
    messages.push_back({Role::system, std::move(system)});
    messages.push_back(
        {Role::user, "user_id: " + instruction.user_id + "\nrequest: " + instruction.text});
    for (const auto& turn : transcript) messages.push_back({turn.role, turn.content});
    return messages;
}

}  // namespace pwab::agent

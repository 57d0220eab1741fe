#pragma once
// Benchmark construction: prompt templates, request building for profile and
// instruction generation, and parsing of the generated output. No network
// activity happens here; requests go through an agent::Policy.

#include <pwab/agent.hpp>
#include <pwab/corpus.hpp>

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pwab::benchgen {

inline constexpr std::string_view kTemplateVersion = "1";

enum class TemplateId {
    profile,
    search_instruction,
    rec_instruction,
    review_instruction,
    user_simulator,
    single_turn_agent,
    multi_turn_agent,
};

std::string_view to_string(TemplateId id);
TemplateId parse_template_id(std::string_view text);

struct PromptTemplate {
    TemplateId id;
    std::string body;

    // Distinct `<NAME>` placeholders in order of first appearance.
    std::vector<std::string> placeholders() const;
};

const PromptTemplate& get_template(TemplateId id);

class MissingBindingError : public InvalidArgument {
public:
    explicit MissingBindingError(std::string placeholder)
        : InvalidArgument("missing binding for placeholder <" + placeholder + ">"),
          placeholder_(std::move(placeholder)) {}
    const std::string& placeholder() const noexcept { return placeholder_; }

private:
    std::string placeholder_;
};

using Bindings = std::map<std::string, std::string>;

// Substitutes every placeholder in a single pass; bound values are not
// re-scanned. Throws MissingBindingError.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);
std::string render_prompt(TemplateId id, const Bindings& bindings);

struct GenerationRequest {
    std::string prompt;
    agent::Sampling sampling;
};

struct WordLimits {
    int search = 60;
    int recommendation = 40;
    int review = 80;
};

struct BenchgenConfig {
    WordLimits word_limits;
    agent::Sampling sampling{0.7, 512};
    int max_retries = 2;  // extra attempts after a malformed generation
};

// Text blocks bound into the templates.
std::string format_profile(const corpus::UserProfile& profile);
std::string format_product(const corpus::Product& product);
std::string format_history(const corpus::UserRecord& user, const corpus::Catalog& catalog);

GenerationRequest build_profile_prompt(const corpus::UserRecord& user, const corpus::Catalog& catalog,
                                       const BenchgenConfig& config = {});

// Display-keyed JSON object ("Price Sensitivity", "Focus Aspect", ...), the
// shape the profile prompt asks for.
std::string serialize_profile_output(const corpus::UserProfile& profile);

// Accepts display or snake_case keys, case-insensitive; tri-level values
// folded to lower case. Throws ParseError (with offset) on unparseable text,
// ValidationError naming the missing key or bad value.
corpus::UserProfile parse_profile_output(std::string_view text);

struct ReviewTarget {
    corpus::Product product;
    std::string review_text;
};

using InstructionTarget = std::variant<corpus::Product, ReviewTarget>;

// Throws InvalidArgument when the target type does not fit the task kind.
GenerationRequest build_instruction_prompt(corpus::TaskKind kind, const corpus::UserRecord& user,
                                           const InstructionTarget& target,
                                           const BenchgenConfig& config = {});

// Cleans a generated instruction: trims whitespace and surrounding quotes.
// Throws ParseError when nothing is left.
std::string parse_instruction_output(std::string_view text);

// Calls the policy, retrying up to config.max_retries more times when
// `parse` throws ParseError/ValidationError; then rethrows the last error.
template <typename T>
T generate_with_retry(agent::Policy& policy, const GenerationRequest& request,
                      const std::function<T(std::string_view)>& parse, int max_retries) {
    const std::vector<agent::ChatMessage> messages = {{agent::Role::user, request.prompt}};
    for (int attempt = 0;; ++attempt) {
        auto text = policy.complete(messages, 1, request.sampling).front();
        try {
            return parse(text);
        } catch (const ParseError&) {
            if (attempt >= max_retries) throw;
        } catch (const ValidationError&) {
            if (attempt >= max_retries) throw;
        }
    }
}

// Regenerates every user's profile from their full behavior list.
void generate_profiles(corpus::DatasetBundle& bundle, agent::Policy& policy,
                       const BenchgenConfig& config = {});

// Rewrites the text of every instruction using the matching template;
// targets and ids are kept.
void generate_instructions(corpus::DatasetBundle& bundle, agent::Policy& policy,
                           const BenchgenConfig& config = {});

}  // namespace pwab::benchgen

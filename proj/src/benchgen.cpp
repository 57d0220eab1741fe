#include <pwab/benchgen.hpp>

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <regex>
#include <sstream>

namespace pwab::benchgen {

namespace detail {
const std::map<std::string, std::string>& template_assets();
}

namespace {

constexpr TemplateId kAllTemplates[] = {
    TemplateId::profile,           TemplateId::search_instruction, TemplateId::rec_instruction,
    TemplateId::review_instruction, TemplateId::user_simulator,    TemplateId::single_turn_agent,
    TemplateId::multi_turn_agent};

const std::regex& placeholder_pattern() {
    static const std::regex re("<([A-Z](?:[A-Z0-9_ ]*[A-Z0-9_])?)>");
    return re;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string title_case(corpus::Level level) {
    std::string s(corpus::to_string(level));
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string format_number(double v, int precision) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision) << v;
    return ss.str();
}

std::string level_options(std::string_view (corpus::ProfileChoices::*describe)(corpus::Level) const) {
    const auto& choices = corpus::profile_choices();
    std::string out = "[";
    const corpus::Level levels[] = {corpus::Level::high, corpus::Level::medium, corpus::Level::low};
    for (std::size_t i = 0; i < 3; ++i) {
        if (i) out += ", ";
        out += "\"" + title_case(levels[i]) + "\": \"" + std::string((choices.*describe)(levels[i])) + "\"";
    }
    return out + "]";
}

std::string list_options(const std::vector<std::string>& items, bool quoted) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += quoted ? "\"" + items[i] + "\"" : items[i];
    }
    return out + "]";
}

// Normalized profile keys: lower-case alphanumerics only.
std::string normalize_key(std::string_view key) {
    std::string out;
    for (unsigned char c : key) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

struct ProfileKey {
    const char* display;
    std::vector<std::string> aliases;  // normalized
};

const std::vector<ProfileKey>& profile_keys() {
    static const std::vector<ProfileKey> keys = {
        {"Gender", {"gender"}},
        {"Age", {"age"}},
        {"Occupation", {"occupation"}},
        {"Price Sensitivity", {"pricesensitivity"}},
        {"Shopping Interest", {"shoppinginterest", "shoppinginterests"}},
        {"Brand Preference", {"brandpreference", "brandpreferences"}},
        {"Diversity Preference", {"diversitypreference"}},
        {"Interaction Complexity", {"interactioncomplexity"}},
        {"Tone and Style", {"toneandstyle"}},
        {"Item Reference", {"itemreference"}},
        {"Focus Aspect", {"focusaspect", "focusaspects"}},
    };
    return keys;
}

std::string value_text(const nlohmann::json& v) {
    if (v.is_string()) return trim(v.get<std::string>());
    if (v.is_array()) {
        std::vector<std::string> parts;
        for (const auto& e : v) parts.push_back(value_text(e));
        return join(parts, ", ");
    }
    if (v.is_null()) return {};
    return v.dump();
}

corpus::Level level_value(const nlohmann::json& v, const char* key) {
    const auto text = value_text(v);
    // Accept "Medium" as well as "Medium: A Balanced Buyer ...".
    std::string head;
    for (char c : text) {
        if (!std::isalpha(static_cast<unsigned char>(c))) break;
        head.push_back(c);
    }
    const auto rest = trim(std::string_view(text).substr(head.size()));
    if (auto level = corpus::parse_level(head); level && (rest.empty() || rest[0] == ':' || rest[0] == '-' || rest[0] == '(')) {
        return *level;
    }
    throw ValidationError(std::string("profile key '") + key + "' has out-of-vocabulary value '" + text +
                          "' (expected high, medium or low)");
}

}  // namespace

std::string_view to_string(TemplateId id) {
    switch (id) {
        case TemplateId::profile: return "profile";
        case TemplateId::search_instruction: return "search_instruction";
        case TemplateId::rec_instruction: return "rec_instruction";
        case TemplateId::review_instruction: return "review_instruction";
        case TemplateId::user_simulator: return "user_simulator";
        case TemplateId::single_turn_agent: return "single_turn_agent";
        case TemplateId::multi_turn_agent: return "multi_turn_agent";
    }
    return "profile";
}

TemplateId parse_template_id(std::string_view text) {
    for (auto id : kAllTemplates) {
        if (to_string(id) == text) return id;
    }
    throw InvalidArgument("unknown template id '" + std::string(text) + "'");
}

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> out;
    for (std::sregex_iterator it(body.begin(), body.end(), placeholder_pattern()), end; it != end; ++it) {
        auto name = (*it)[1].str();
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
    }
    return out;
}

const PromptTemplate& get_template(TemplateId id) {
    static const std::vector<PromptTemplate> templates = [] {
        std::vector<PromptTemplate> out;
        const auto& assets = detail::template_assets();
        for (auto t : kAllTemplates) {
            auto it = assets.find(std::string(to_string(t)));
            if (it == assets.end()) throw Error("template asset missing: " + std::string(to_string(t)));
            out.push_back({t, trim(it->second)});
        }
        return out;
    }();
    return templates.at(static_cast<std::size_t>(id));
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
    std::string out;
    out.reserve(tmpl.body.size() * 2);
    auto last = tmpl.body.cbegin();
    for (std::sregex_iterator it(tmpl.body.begin(), tmpl.body.end(), placeholder_pattern()), end;
         it != end; ++it) {
        const auto& m = *it;
        const auto name = m[1].str();
        auto b = bindings.find(name);
        if (b == bindings.end()) throw MissingBindingError(name);
        out.append(last, m[0].first);
        out += b->second;
        last = m[0].second;
    }
    out.append(last, tmpl.body.cend());
    return out;
}

std::string render_prompt(TemplateId id, const Bindings& bindings) {
    return render(get_template(id), bindings);
}

// --- text blocks ------------------------------------------------------------

std::string format_profile(const corpus::UserProfile& p) {
    std::string out;
    out += "Gender: " + p.gender + "\n";
    out += "Age: " + p.age + "\n";
    out += "Occupation: " + p.occupation + "\n";
    out += "Price Sensitivity: " + title_case(p.price_sensitivity) + "\n";
    out += "Shopping Interest: " + p.shopping_interest + "\n";
    out += "Brand Preference: " + p.brand_preference + "\n";
    out += "Diversity Preference: " + title_case(p.diversity_preference) + "\n";
    out += "Interaction Complexity: " + title_case(p.interaction_complexity) + "\n";
    out += "Tone and Style: " + p.tone_and_style + "\n";
    out += "Item Reference: " + p.item_reference + "\n";
    out += "Focus Aspect: " + join(p.focus_aspects, ", ");
    return out;
}

std::string format_product(const corpus::Product& p) {
    std::string out;
    out += "Title: " + p.title + "\n";
    out += "Category: " + p.category + "\n";
    out += "Price: " + (p.price ? "$" + format_number(*p.price, 2) : std::string("unknown")) + "\n";
    out += "Store: " + p.store + "\n";
    out += "Average Rating: " +
           (p.average_rating ? format_number(*p.average_rating, 1) : std::string("unknown")) + "\n";
    out += "Number of Ratings: " + std::to_string(p.rating_count) + "\n";
    if (!p.features.empty()) out += "Features: " + join(p.features, "; ") + "\n";
    out += "Description: " + p.description;
    return out;
}

std::string format_history(const corpus::UserRecord& user, const corpus::Catalog& catalog) {
    std::string out;
    std::size_t k = 0;
    for (const auto& b : user.all_behaviors()) {
        const auto& p = catalog.at(b.product_id);
        out += std::to_string(++k) + ". [" + std::to_string(b.timestamp) + "] " + p.title + " (" +
               p.category + ", " + (p.price ? "$" + format_number(*p.price, 2) : std::string("price unknown")) +
               ", " + p.store + ") | Rating: " + format_number(b.rating, 1) + " | " + b.review_title +
               " | " + b.review_text + "\n";
    }
    return out;
}

GenerationRequest build_profile_prompt(const corpus::UserRecord& user, const corpus::Catalog& catalog,
                                       const BenchgenConfig& config) {
    const auto& choices = corpus::profile_choices();
    Bindings b = {
        {"GENDER", list_options(choices.genders, false)},
        {"AGE", list_options(choices.ages, false)},
        {"OCCUPATION", list_options(choices.occupations, false)},
        {"PRICE SENSITIVITY", level_options(&corpus::ProfileChoices::price_sensitivity)},
        {"DIVERSITY", level_options(&corpus::ProfileChoices::diversity)},
        {"INTERACTION", level_options(&corpus::ProfileChoices::interaction)},
        {"FOCUS ASPECT", list_options(choices.focus_aspects, true)},
        {"HISTORY", format_history(user, catalog)},
    };
    return {render_prompt(TemplateId::profile, b), config.sampling};
}

std::string serialize_profile_output(const corpus::UserProfile& p) {
    nlohmann::ordered_json j;
    j["Gender"] = p.gender;
    j["Age"] = p.age;
    j["Occupation"] = p.occupation;
    j["Price Sensitivity"] = title_case(p.price_sensitivity);
    j["Shopping Interest"] = p.shopping_interest;
    j["Brand Preference"] = p.brand_preference;
    j["Diversity Preference"] = title_case(p.diversity_preference);
    j["Interaction Complexity"] = title_case(p.interaction_complexity);
    j["Tone and Style"] = p.tone_and_style;
    j["Item Reference"] = p.item_reference;
    j["Focus Aspect"] = p.focus_aspects;
    return j.dump(2);
}

corpus::UserProfile parse_profile_output(std::string_view text) {
    auto found = agent::extract_first_json_object(text);
    if (!found) {
        const auto brace = text.find('{');
        if (brace == std::string_view::npos) {
            throw ParseError("profile output contains no JSON object", 0, text.size());
        }
        std::size_t offset = brace;
        try {
            const auto parsed = nlohmann::json::parse(text.substr(brace));
            static_cast<void>(parsed);
        } catch (const nlohmann::json::parse_error& e) {
            offset = brace + (e.byte > 0 ? e.byte - 1 : 0);
        }
        throw ParseError("profile output is not a well-formed JSON object (offset " +
                             std::to_string(offset) + ")",
                         0, offset);
    }
    const auto& obj = found->first;
    // Flatten one level of grouping ("Basic Information": {...}) if present.
    std::map<std::string, nlohmann::json> fields;
    for (const auto& [k, v] : obj.items()) {
        if (v.is_object()) {
            for (const auto& [ik, iv] : v.items()) fields.emplace(normalize_key(ik), iv);
        } else {
            fields.emplace(normalize_key(k), v);
        }
    }
    auto get = [&](std::size_t idx) -> const nlohmann::json& {
        const auto& key = profile_keys()[idx];
        for (const auto& alias : key.aliases) {
            if (auto it = fields.find(alias); it != fields.end()) return it->second;
        }
        throw ValidationError(std::string("profile output is missing key '") + key.display + "'");
    };

    corpus::UserProfile p;
    p.gender = value_text(get(0));
    p.age = value_text(get(1));
    p.occupation = value_text(get(2));
    p.price_sensitivity = level_value(get(3), profile_keys()[3].display);
    p.shopping_interest = value_text(get(4));
    p.brand_preference = value_text(get(5));
    p.diversity_preference = level_value(get(6), profile_keys()[6].display);
    p.interaction_complexity = level_value(get(7), profile_keys()[7].display);
    p.tone_and_style = value_text(get(8));
    p.item_reference = value_text(get(9));
    const auto& focus = get(10);
    if (focus.is_array()) {
        for (const auto& f : focus) p.focus_aspects.push_back(value_text(f));
    } else {
        std::stringstream ss(value_text(focus));
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (auto t = trim(part); !t.empty()) p.focus_aspects.push_back(t);
        }
    }
    return p;
}

GenerationRequest build_instruction_prompt(corpus::TaskKind kind, const corpus::UserRecord& user,
                                           const InstructionTarget& target,
                                           const BenchgenConfig& config) {
    const auto& choices = corpus::profile_choices();
    const auto& profile = user.profile;
    Bindings b = {
        {"PROFILE", format_profile(profile)},
        {"DIVERSITY", std::string(choices.diversity(profile.diversity_preference))},
        {"INTERACTION", std::string(choices.interaction(profile.interaction_complexity))},
        {"FOCUS_ASPECT", join(profile.focus_aspects, ", ")},
        {"TONE_AND_STYLE", profile.tone_and_style},
    };
    TemplateId id;
    int limit = 0;
    if (kind == corpus::TaskKind::review) {
        const auto* review = std::get_if<ReviewTarget>(&target);
        if (!review) {
            throw InvalidArgument("review instructions need a review target (product + review text)");
        }
        b["PRODUCT"] = format_product(review->product);
        b["REVIEW"] = review->review_text;
        id = TemplateId::review_instruction;
        limit = config.word_limits.review;
    } else {
        const auto* product = std::get_if<corpus::Product>(&target);
        if (!product) {
            throw InvalidArgument(std::string(corpus::to_string(kind)) +
                                  " instructions need a product target");
        }
        b["PRODUCT"] = format_product(*product);
        if (kind == corpus::TaskKind::search) {
            id = TemplateId::search_instruction;
            limit = config.word_limits.search;
        } else {
            id = TemplateId::rec_instruction;
            limit = config.word_limits.recommendation;
        }
    }
    b["NUM"] = std::to_string(limit);
    return {render_prompt(id, b), config.sampling};
}

std::string parse_instruction_output(std::string_view text) {
    auto t = trim(text);
    while (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') || (t.front() == '\'' && t.back() == '\''))) {
        t = trim(std::string_view(t).substr(1, t.size() - 2));
    }
    if (t.empty()) throw ParseError("generated instruction is empty");
    return t;
}

void generate_profiles(corpus::DatasetBundle& bundle, agent::Policy& policy,
                       const BenchgenConfig& config) {
    const std::function<corpus::UserProfile(std::string_view)> parse = parse_profile_output;
    for (auto& user : bundle.users) {
        auto request = build_profile_prompt(user, bundle.catalog, config);
        user.profile = generate_with_retry(policy, request, parse, config.max_retries);
    }
}

void generate_instructions(corpus::DatasetBundle& bundle, agent::Policy& policy,
                           const BenchgenConfig& config) {
    const std::function<std::string(std::string_view)> parse = parse_instruction_output;
    for (auto& ins : bundle.instructions) {
        const auto* user = bundle.find_user(ins.user_id);
        if (!user) throw ValidationError("instruction " + ins.instruction_id + " has unknown user");
        InstructionTarget target;
        if (ins.task_kind == corpus::TaskKind::review) {
            if (!ins.product_id) {
                throw ValidationError("review instruction " + ins.instruction_id + " has no product_id");
            }
            target = ReviewTarget{bundle.catalog.at(*ins.product_id), ins.ground_truth};
        } else {
            target = bundle.catalog.at(ins.ground_truth);
        }
        auto request = build_instruction_prompt(ins.task_kind, *user, target, config);
        ins.text = generate_with_retry(policy, request, parse, config.max_retries);
    }
}

}  // namespace pwab::benchgen

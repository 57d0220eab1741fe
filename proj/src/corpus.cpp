#include <pwab/corpus.hpp>
#include <pwab/jsonl.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace pwab::corpus {

namespace {

constexpr const char* kUnknown = "unknown";

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

nlohmann::json optional_number(const std::optional<double>& v) {
    if (v) return *v;
    return kUnknown;
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == kUnknown) return std::nullopt;
    throw ParseError(std::string("field '") + key + "' must be a number or \"unknown\"");
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return it->template get<T>();
}

Level read_level(const nlohmann::json& j, const char* key) {
    auto text = j.at(key).get<std::string>();
    auto level = parse_level(text);
    if (!level) {
        throw ParseError(std::string("field '") + key + "' must be high, medium or low, got '" +
                         text + "'");
    }
    return *level;
}

void check_block_order(const UserRecord& u, const std::vector<BehaviorRecord>& block,
                       const char* name) {
    for (std::size_t i = 1; i < block.size(); ++i) {
        if (block[i].timestamp < block[i - 1].timestamp) {
            throw ValidationError("user " + u.user_id + ": " + name +
                                  " block is not ordered by timestamp");
        }
    }
}

}  // namespace

const std::vector<std::string>& default_categories() {
    static const std::vector<std::string> categories = {
        "Electronics", "Home and Kitchen", "Grocery and Gourmet Food",
        "Clothing, Shoes, and Jewelry", "Health and Household"};
    return categories;
}

std::string_view to_string(Level level) {
    switch (level) {
        case Level::high: return "high";
        case Level::medium: return "medium";
        case Level::low: return "low";
    }
    return "medium";
}

std::optional<Level> parse_level(std::string_view text) {
    auto l = lower(text);
    if (l == "high") return Level::high;
    if (l == "medium") return Level::medium;
    if (l == "low") return Level::low;
    return std::nullopt;
}

std::string_view to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::search: return "search";
        case TaskKind::recommendation: return "recommendation";
        case TaskKind::review: return "review";
    }
    return "search";
}

TaskKind parse_task_kind(std::string_view text) {
    if (text == "search") return TaskKind::search;
    if (text == "recommendation") return TaskKind::recommendation;
    if (text == "review") return TaskKind::review;
    throw ParseError("unknown task_kind '" + std::string(text) + "'");
}

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

std::vector<BehaviorRecord> UserRecord::all_behaviors() const {
    std::vector<BehaviorRecord> out;
    out.reserve(history.size() + train.size() + test.size());
    out.insert(out.end(), history.begin(), history.end());
    out.insert(out.end(), train.begin(), train.end());
    out.insert(out.end(), test.begin(), test.end());
    return out;
}

Catalog::Catalog(std::vector<Product> products) : products_(std::move(products)) {
    by_id_.reserve(products_.size());
    for (std::size_t i = 0; i < products_.size(); ++i) {
        if (!by_id_.emplace(products_[i].product_id, i).second) {
            throw ValidationError("duplicate product_id '" + products_[i].product_id + "'");
        }
    }
}

const Product* Catalog::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &products_[it->second];
}

const Product& Catalog::at(std::string_view id) const {
    if (const auto* p = find(id)) return *p;
    throw ValidationError("unknown product_id '" + std::string(id) + "'");
}

std::optional<std::size_t> Catalog::ordinal(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

const UserRecord* DatasetBundle::find_user(std::string_view user_id) const {
    for (const auto& u : users) {
        if (u.user_id == user_id) return &u;
    }
    return nullptr;
}

// --- JSON ---------------------------------------------------------------

void to_json(nlohmann::json& j, const Product& p) {
    j = nlohmann::json{{"product_id", p.product_id},
                       {"title", p.title},
                       {"category", p.category},
                       {"price", optional_number(p.price)},
                       {"store", p.store},
                       {"average_rating", optional_number(p.average_rating)},
                       {"rating_count", p.rating_count},
                       {"features", p.features},
                       {"description", p.description}};
}

void from_json(const nlohmann::json& j, Product& p) {
    p.product_id = j.at("product_id").get<std::string>();
    p.title = j.at("title").get<std::string>();
    p.category = j.at("category").get<std::string>();
    p.price = read_optional_number(j, "price");
    p.store = get_or<std::string>(j, "store", "");
    p.average_rating = read_optional_number(j, "average_rating");
    p.rating_count = get_or<std::int64_t>(j, "rating_count", 0);
    p.features = get_or<std::vector<std::string>>(j, "features", {});
    p.description = get_or<std::string>(j, "description", "");
    if (p.product_id.empty()) throw ParseError("empty product_id");
    if (p.price && *p.price < 0) throw ParseError("negative price for " + p.product_id);
    if (p.average_rating && (*p.average_rating < 1.0 || *p.average_rating > 5.0)) {
        throw ParseError("average_rating out of [1,5] for " + p.product_id);
    }
    if (p.rating_count < 0) throw ParseError("negative rating_count for " + p.product_id);
}

void to_json(nlohmann::json& j, const BehaviorRecord& b) {
    j = nlohmann::json{{"timestamp", b.timestamp},
                       {"product_id", b.product_id},
                       {"rating", b.rating},
                       {"review_title", b.review_title},
                       {"review_text", b.review_text}};
}

void from_json(const nlohmann::json& j, BehaviorRecord& b) {
    b.timestamp = j.at("timestamp").get<std::int64_t>();
    b.product_id = j.at("product_id").get<std::string>();
    b.rating = j.at("rating").get<double>();
    b.review_title = get_or<std::string>(j, "review_title", "");
    b.review_text = get_or<std::string>(j, "review_text", "");
    if (b.rating < 1.0 || b.rating > 5.0) {
        throw ParseError("rating out of [1,5] for behavior on " + b.product_id);
    }
}

void to_json(nlohmann::json& j, const UserProfile& p) {
    j = nlohmann::json{{"gender", p.gender},
                       {"age", p.age},
                       {"occupation", p.occupation},
                       {"price_sensitivity", to_string(p.price_sensitivity)},
                       {"shopping_interest", p.shopping_interest},
                       {"brand_preference", p.brand_preference},
                       {"diversity_preference", to_string(p.diversity_preference)},
                       {"interaction_complexity", to_string(p.interaction_complexity)},
                       {"tone_and_style", p.tone_and_style},
                       {"item_reference", p.item_reference},
                       {"focus_aspects", p.focus_aspects}};
}

void from_json(const nlohmann::json& j, UserProfile& p) {
    p.gender = j.at("gender").get<std::string>();
    p.age = j.at("age").get<std::string>();
    p.occupation = j.at("occupation").get<std::string>();
    p.price_sensitivity = read_level(j, "price_sensitivity");
    p.shopping_interest = j.at("shopping_interest").get<std::string>();
    p.brand_preference = j.at("brand_preference").get<std::string>();
    p.diversity_preference = read_level(j, "diversity_preference");
    p.interaction_complexity = read_level(j, "interaction_complexity");
    p.tone_and_style = j.at("tone_and_style").get<std::string>();
    p.item_reference = j.at("item_reference").get<std::string>();
    p.focus_aspects = j.at("focus_aspects").get<std::vector<std::string>>();
}

void to_json(nlohmann::json& j, const UserRecord& u) {
    j = nlohmann::json{{"user_id", u.user_id},
                       {"profile", u.profile},
                       {"history", u.history},
                       {"train", u.train},
                       {"test", u.test}};
}

void from_json(const nlohmann::json& j, UserRecord& u) {
    u.user_id = j.at("user_id").get<std::string>();
    u.profile = j.at("profile").get<UserProfile>();
    u.history = j.at("history").get<std::vector<BehaviorRecord>>();
    u.train = j.at("train").get<std::vector<BehaviorRecord>>();
    u.test = j.at("test").get<std::vector<BehaviorRecord>>();
}

void to_json(nlohmann::json& j, const Instruction& i) {
    j = nlohmann::json{{"instruction_id", i.instruction_id},
                       {"user_id", i.user_id},
                       {"task_kind", to_string(i.task_kind)},
                       {"text", i.text},
                       {"ground_truth", i.ground_truth}};
    if (i.product_id) j["product_id"] = *i.product_id;
}

void from_json(const nlohmann::json& j, Instruction& i) {
    i.instruction_id = j.at("instruction_id").get<std::string>();
    i.user_id = j.at("user_id").get<std::string>();
    i.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
    i.text = j.at("text").get<std::string>();
    i.ground_truth = j.at("ground_truth").get<std::string>();
    if (auto it = j.find("product_id"); it != j.end() && !it->is_null()) {
        i.product_id = it->get<std::string>();
    } else {
        i.product_id.reset();
    }
}

// --- loading & validation -----------------------------------------------

std::vector<Product> load_catalog(const std::filesystem::path& path,
                                  const std::vector<std::string>& categories) {
    std::vector<Product> products;
    std::set<std::string> seen;
    const std::set<std::string> allowed(categories.begin(), categories.end());
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t line) {
        auto p = j.get<Product>();
        if (!allowed.count(p.category)) {
            throw ParseError("product " + p.product_id + " has unconfigured category '" +
                                 p.category + "'",
                             line);
        }
        if (!seen.insert(p.product_id).second) {
            throw ValidationError(path.string() + ":" + std::to_string(line) +
                                  ": duplicate product_id '" + p.product_id + "'");
        }
        products.push_back(std::move(p));
    });
    return products;
}

void validate_user(const UserRecord& u, const Catalog& catalog) {
    check_block_order(u, u.history, "history");
    check_block_order(u, u.train, "train");
    check_block_order(u, u.test, "test");
    const std::vector<BehaviorRecord>* blocks[] = {&u.history, &u.train, &u.test};
    const char* names[] = {"history", "train", "test"};
    const BehaviorRecord* prev_last = nullptr;
    const char* prev_name = nullptr;
    for (int b = 0; b < 3; ++b) {
        const auto& block = *blocks[b];
        if (block.empty()) continue;
        if (prev_last && block.front().timestamp < prev_last->timestamp) {
            throw ValidationError("user " + u.user_id + ": " + names[b] + " block starts before the end of the " +
                                  prev_name + " block");
        }
        prev_last = &block.back();
        prev_name = names[b];
        for (const auto& behavior : block) {
            if (!catalog.find(behavior.product_id)) {
                throw ValidationError("user " + u.user_id + " references unknown product '" +
                                      behavior.product_id + "'");
            }
        }
    }
}

std::vector<UserRecord> load_users(const std::filesystem::path& path, const Catalog& catalog) {
    std::vector<UserRecord> users;
    std::set<std::string> seen;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t line) {
        auto u = j.get<UserRecord>();
        if (!seen.insert(u.user_id).second) {
            throw ValidationError(path.string() + ":" + std::to_string(line) +
                                  ": duplicate user_id '" + u.user_id + "'");
        }
        validate_user(u, catalog);
        users.push_back(std::move(u));
    });
    return users;
}

void validate_instruction(const Instruction& ins, const Catalog& catalog,
                          const std::unordered_map<std::string, const UserRecord*>& users) {
    if (users.find(ins.user_id) == users.end()) {
        throw ValidationError("instruction " + ins.instruction_id + " references unknown user '" +
                              ins.user_id + "'");
    }
    if (ins.task_kind == TaskKind::review) {
        if (ins.ground_truth.empty()) {
            throw ValidationError("review instruction " + ins.instruction_id +
                                  " has an empty reference review");
        }
        if (ins.product_id && !catalog.find(*ins.product_id)) {
            throw ValidationError("instruction " + ins.instruction_id +
                                  " references unknown product '" + *ins.product_id + "'");
        }
    } else if (!catalog.find(ins.ground_truth)) {
        throw ValidationError("instruction " + ins.instruction_id +
                              " has ground truth not in catalog: '" + ins.ground_truth + "'");
    }
}

std::vector<Instruction> load_instructions(const std::filesystem::path& path,
                                           const Catalog& catalog,
                                           const std::vector<UserRecord>& users) {
    std::unordered_map<std::string, const UserRecord*> by_id;
    for (const auto& u : users) by_id.emplace(u.user_id, &u);
    std::vector<Instruction> out;
    std::set<std::string> seen;
    jsonl::for_each_record(path, [&](const nlohmann::json& j, std::size_t line) {
        auto ins = j.get<Instruction>();
        if (!seen.insert(ins.instruction_id).second) {
            throw ValidationError(path.string() + ":" + std::to_string(line) +
                                  ": duplicate instruction_id '" + ins.instruction_id + "'");
        }
        validate_instruction(ins, catalog, by_id);
        out.push_back(std::move(ins));
    });
    return out;
}

std::string serialize_catalog(const Catalog& catalog) {
    std::vector<nlohmann::json> records(catalog.products().begin(), catalog.products().end());
    return jsonl::dump_lines(records);
}

std::string serialize_users(const std::vector<UserRecord>& users) {
    std::vector<nlohmann::json> records(users.begin(), users.end());
    return jsonl::dump_lines(records);
}

std::string serialize_instructions(const std::vector<Instruction>& instructions) {
    std::vector<nlohmann::json> records(instructions.begin(), instructions.end());
    return jsonl::dump_lines(records);
}

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    jsonl::write_file(dir / "catalog.jsonl", serialize_catalog(bundle.catalog));
    jsonl::write_file(dir / "users.jsonl", serialize_users(bundle.users));
    jsonl::write_file(dir / "instructions.jsonl", serialize_instructions(bundle.instructions));
    nlohmann::json meta = {{"split", to_string(bundle.split)}};
    jsonl::write_file(dir / "bundle.json", meta.dump() + "\n");
}

DatasetBundle load_bundle(const std::filesystem::path& dir) {
    DatasetBundle bundle;
    bundle.catalog = Catalog(load_catalog(dir / "catalog.jsonl"));
    bundle.users = load_users(dir / "users.jsonl", bundle.catalog);
    bundle.instructions = load_instructions(dir / "instructions.jsonl", bundle.catalog, bundle.users);
    if (std::filesystem::exists(dir / "bundle.json")) {
        auto meta = nlohmann::json::parse(jsonl::read_file(dir / "bundle.json"));
        bundle.split = meta.value("split", "test") == "train" ? Split::train : Split::test;
    }
    return bundle;
}

// --- splitting ----------------------------------------------------------

SplitResult chronological_split(const std::vector<BehaviorRecord>& behaviors, SplitRatios ratios) {
    const std::size_t n = behaviors.size();
    if (n == 0) {
        throw InvalidArgument("chronological_split: empty behavior list");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (behaviors[i].timestamp < behaviors[i - 1].timestamp) {
            throw InvalidArgument("chronological_split: behaviors are not sorted by timestamp");
        }
    }
    if (ratios.history < 0 || ratios.train < 0 || ratios.test < 0 ||
        ratios.history + ratios.train + ratios.test <= 0) {
        throw InvalidArgument("chronological_split: invalid ratios");
    }
    const double total = ratios.history + ratios.train + ratios.test;
    auto n_history = static_cast<std::size_t>(
        std::floor(ratios.history / total * static_cast<double>(n) + 1e-9));
    n_history = std::min(n_history, n);
    if (n >= 3) n_history = std::min(n_history, n - 2);

    const std::size_t rest = n - n_history;
    const double tail = ratios.train + ratios.test;
    std::size_t n_test =
        tail > 0 ? static_cast<std::size_t>(std::floor(static_cast<double>(rest) * ratios.test / tail + 1e-9))
                 : 0;
    if (n >= 3) n_test = std::clamp<std::size_t>(n_test, 1, rest - 1);

    SplitResult out;
    auto first_train = behaviors.begin() + static_cast<std::ptrdiff_t>(n_history);
    auto first_test = behaviors.end() - static_cast<std::ptrdiff_t>(n_test);
    out.history.assign(behaviors.begin(), first_train);
    out.train.assign(first_train, first_test);
    out.test.assign(first_test, behaviors.end());
    return out;
}

}  // namespace pwab::corpus

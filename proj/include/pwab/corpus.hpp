#pragma once
// Data model, line-delimited ingestion, chronological splitting and the
// synthetic fixture generator.
//
// Record format: one JSON object per line, UTF-8. Field names match the
// struct members below. Unknown price / average_rating are written as the
// string "unknown" (0 is a legal price).

#include <pwab/error.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace pwab::corpus {

using ProductId = std::string;

const std::vector<std::string>& default_categories();

struct Product {
    ProductId product_id;  // parent ASIN
    std::string title;
    std::string category;
    std::optional<double> price;
    std::string store;
    std::optional<double> average_rating;
    std::int64_t rating_count = 0;
    std::vector<std::string> features;
    std::string description;

    bool operator==(const Product&) const = default;
};

struct BehaviorRecord {
    std::int64_t timestamp = 0;
    ProductId product_id;
    double rating = 0.0;
    std::string review_title;
    std::string review_text;

    bool operator==(const BehaviorRecord&) const = default;
};

enum class Level { high, medium, low };

std::string_view to_string(Level level);
std::optional<Level> parse_level(std::string_view text);  // case-insensitive

struct UserProfile {
    std::string gender;
    std::string age;
    std::string occupation;
    Level price_sensitivity = Level::medium;
    Level diversity_preference = Level::medium;
    Level interaction_complexity = Level::medium;
    std::string shopping_interest;
    std::string brand_preference;
    std::string tone_and_style;
    std::string item_reference;
    std::vector<std::string> focus_aspects;

    bool operator==(const UserProfile&) const = default;
};

// Enumerated options offered to the profile generator.
struct ProfileChoices {
    std::vector<std::string> genders;
    std::vector<std::string> ages;
    std::vector<std::string> occupations;
    std::vector<std::string> focus_aspects;
    // Persona text for each tri-level value of the three behavioral fields.
    std::string_view price_sensitivity(Level level) const;
    std::string_view diversity(Level level) const;
    std::string_view interaction(Level level) const;
};

const ProfileChoices& profile_choices();

struct UserRecord {
    std::string user_id;
    UserProfile profile;
    std::vector<BehaviorRecord> history;
    std::vector<BehaviorRecord> train;
    std::vector<BehaviorRecord> test;

    // history ++ train ++ test
    std::vector<BehaviorRecord> all_behaviors() const;

    bool operator==(const UserRecord&) const = default;
};

enum class TaskKind { search, recommendation, review };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);  // throws ParseError
inline constexpr TaskKind kAllTaskKinds[] = {TaskKind::search, TaskKind::recommendation,
                                             TaskKind::review};

struct Instruction {
    std::string instruction_id;
    std::string user_id;
    TaskKind task_kind = TaskKind::search;
    std::string text;
    // Target product_id for search/recommendation, reference review text for review.
    std::string ground_truth;
    // Review tasks only: the purchased product being reviewed.
    std::optional<ProductId> product_id;

    bool operator==(const Instruction&) const = default;
};

enum class Split { train, test };

std::string_view to_string(Split split);

// Immutable id -> product lookup over an owned product list.
class Catalog {
public:
    Catalog() = default;
    explicit Catalog(std::vector<Product> products);  // throws ValidationError on duplicate ids

    const std::vector<Product>& products() const noexcept { return products_; }
    std::size_t size() const noexcept { return products_.size(); }
    bool empty() const noexcept { return products_.empty(); }

    const Product* find(std::string_view id) const;
    const Product& at(std::string_view id) const;  // throws ValidationError
    std::optional<std::size_t> ordinal(std::string_view id) const;

    bool operator==(const Catalog& other) const { return products_ == other.products_; }

private:
    std::vector<Product> products_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

struct DatasetBundle {
    Catalog catalog;
    std::vector<UserRecord> users;
    std::vector<Instruction> instructions;
    Split split = Split::test;

    const UserRecord* find_user(std::string_view user_id) const;

    bool operator==(const DatasetBundle&) const = default;
};

// JSON conversions; the record format on disk.
void to_json(nlohmann::json& j, const Product& p);
void from_json(const nlohmann::json& j, Product& p);
void to_json(nlohmann::json& j, const BehaviorRecord& b);
void from_json(const nlohmann::json& j, BehaviorRecord& b);
void to_json(nlohmann::json& j, const UserProfile& p);
void from_json(const nlohmann::json& j, UserProfile& p);
void to_json(nlohmann::json& j, const UserRecord& u);
void from_json(const nlohmann::json& j, UserRecord& u);
void to_json(nlohmann::json& j, const Instruction& i);
void from_json(const nlohmann::json& j, Instruction& i);

// Categories must come from `categories`.
std::vector<Product> load_catalog(const std::filesystem::path& path,
                                  const std::vector<std::string>& categories = default_categories());
std::vector<UserRecord> load_users(const std::filesystem::path& path, const Catalog& catalog);
std::vector<Instruction> load_instructions(const std::filesystem::path& path,
                                           const Catalog& catalog,
                                           const std::vector<UserRecord>& users);

// Checks split ordering and product references; throws ValidationError.
void validate_user(const UserRecord& user, const Catalog& catalog);
void validate_instruction(const Instruction& instruction, const Catalog& catalog,
                          const std::unordered_map<std::string, const UserRecord*>& users);

// Bundle directory layout: catalog.jsonl, users.jsonl, instructions.jsonl, bundle.json.
void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);
DatasetBundle load_bundle(const std::filesystem::path& dir);

// Serialized forms used for byte-identity checks.
std::string serialize_catalog(const Catalog& catalog);
std::string serialize_users(const std::vector<UserRecord>& users);
std::string serialize_instructions(const std::vector<Instruction>& instructions);

struct SplitRatios {
    double history = 0.8;
    double train = 0.1;
    double test = 0.1;
};

struct SplitResult {
    std::vector<BehaviorRecord> history;
    std::vector<BehaviorRecord> train;
    std::vector<BehaviorRecord> test;
};

// Floor for the history boundary, remainder split evenly with train taking the
// odd record; train and test each get at least one record once n >= 3.
SplitResult chronological_split(const std::vector<BehaviorRecord>& behaviors,
                                SplitRatios ratios = {});

struct FixtureOptions {
    std::uint64_t seed = 7;
    int n_users = 10;
    int n_products = 50;
    Split split = Split::test;
    std::vector<std::string> categories = default_categories();
};

DatasetBundle generate_fixture(const FixtureOptions& options);
DatasetBundle generate_fixture(std::uint64_t seed, int n_users, int n_products);

}  // namespace pwab::corpus

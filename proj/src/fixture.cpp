// Desk-scale synthetic dataset. Every draw goes through one seeded
// mt19937_64 stream using plain modulo arithmetic so the output bytes depend
// only on the seed and the sizes.

#include <pwab/corpus.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <random>
#include <set>

namespace pwab::corpus {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    bool chance(std::size_t numerator, std::size_t denominator) {
        return below(denominator) < numerator;
    }
    template <typename C>
    const auto& pick(const C& items) {
        return items[below(items.size())];
    }

private:
    std::mt19937_64 engine_;
};

struct CategoryVocabulary {
    std::array<const char*, 10> nouns;
    const char* use;
};

const CategoryVocabulary& vocabulary_for(std::size_t category_index) {
    static const std::array<CategoryVocabulary, 5> vocab = {{
        {{"headphones", "charger", "cable", "speaker", "keyboard", "mouse", "webcam", "router",
          "earbuds", "powerbank"},
         "home offices and travel"},
        {{"blender", "skillet", "kettle", "knife", "cutting board", "toaster", "mixing bowl",
          "grinder", "spatula", "dish rack"},
         "everyday cooking"},
        {{"coffee beans", "green tea", "olive oil", "granola", "chocolate", "honey", "pasta",
          "rice", "almonds", "hot sauce"},
         "a well stocked pantry"},
        {{"sneakers", "hoodie", "jacket", "socks", "watch", "scarf", "backpack", "belt",
          "sunglasses", "shirt"},
         "casual everyday wear"},
        {{"vitamins", "toothbrush", "hand soap", "thermometer", "bandages", "sunscreen",
          "shampoo", "face mask", "lotion", "floss"},
         "daily personal care"},
    }};
    return vocab[category_index % vocab.size()];
}

constexpr std::array kAdjectives = {"compact",  "wireless",  "stainless", "organic",
                                    "lightweight", "premium", "durable",  "ergonomic",
                                    "classic",  "portable",  "recycled",  "heavy-duty"};
constexpr std::array kBrands = {"Acme",   "Northwind", "Zenith", "Orbit",  "Lumen",
                                "Harbor", "Vertex",    "Maple",  "Summit", "Nimbus"};
constexpr std::array kFeatures = {"two year warranty", "gift ready packaging", "bpa free",
                                  "machine washable",  "travel friendly",      "fast shipping",
                                  "refill available",  "soft touch finish",    "quiet operation",
                                  "non slip base"};
constexpr std::array kTones = {"enthusiastic and upbeat", "dry and matter of fact",
                               "warm and chatty", "critical but fair", "short and direct"};
constexpr std::array kItemReferences = {"mentions past purchases", "compares with brands",
                                        "cites recommendations from friends",
                                        "rarely references other items"};
constexpr std::array kSearchOpeners = {"I'm looking for", "Can you find me", "Searching for",
                                       "I need"};

std::string to_base36(std::size_t value) {
    static constexpr char digits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    std::string out;
    do {
        out.insert(out.begin(), digits[value % 36]);
        value /= 36;
    } while (value != 0);
    return out;
}

std::string product_id_for(Rng& rng, std::set<std::string>& used) {
    static constexpr char alnum[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    while (true) {
        std::string id = "B0";
        for (int i = 0; i < 8; ++i) id += alnum[rng.below(36)];
        if (used.insert(id).second) return id;
    }
}

std::string lower_copy(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct ProductSeed {
    std::size_t category_index;
    const char* noun;
    const char* adjective;
    const char* brand;
};

std::string sentiment_word(double rating) {
    if (rating >= 4.5) return "excellent";
    if (rating >= 3.5) return "pretty good";
    if (rating >= 2.5) return "just okay";
    return "disappointing";
}

BehaviorRecord make_behavior(Rng& rng, const Product& product, const ProductSeed& seed,
                             std::int64_t timestamp) {
    static constexpr std::array<double, 7> ratings = {5, 5, 4, 4, 3, 2, 1};
    static constexpr std::array details = {"it arrived quickly",       "the build feels solid",
                                           "it does exactly what I need", "the price was fair",
                                           "it looks nicer than expected", "setup took a while"};
    static constexpr std::array closings = {"Would buy again.", "Recommended to a friend.",
                                            "Might look elsewhere next time.",
                                            "Happy overall.", "Not sure it was worth it."};
    BehaviorRecord b;
    b.timestamp = timestamp;
    b.product_id = product.product_id;
    b.rating = ratings[rng.below(ratings.size())];
    if (b.rating >= 4) {
        b.review_title = rng.chance(1, 2) ? "Great value" : "Would buy again";
    } else if (b.rating >= 3) {
        b.review_title = "Works as expected";
    } else {
        b.review_title = rng.chance(1, 2) ? "Not what I hoped" : "Disappointing";
    }
    b.review_text = "The " + std::string(seed.noun) + " from " + seed.brand + " is " +
                    sentiment_word(b.rating) + " and " + rng.pick(details) + ". I liked that it is " +
                    seed.adjective + ". " + rng.pick(closings);
    return b;
}

UserProfile make_profile(Rng& rng, const std::vector<std::string>& categories,
                         std::size_t favourite_category, const char* favourite_brand) {
    const auto& choices = profile_choices();
    UserProfile p;
    p.gender = rng.pick(choices.genders);
    p.age = rng.pick(choices.ages);
    p.occupation = rng.pick(choices.occupations);
    static constexpr std::array levels = {Level::high, Level::medium, Level::low};
    p.price_sensitivity = rng.pick(levels);
    p.diversity_preference = rng.pick(levels);
    p.interaction_complexity = rng.pick(levels);
    p.shopping_interest = "Mostly " + lower_copy(categories[favourite_category]) + " items";
    p.brand_preference = favourite_brand;
    p.tone_and_style = rng.pick(kTones);
    p.item_reference = rng.pick(kItemReferences);
    auto first = rng.below(choices.focus_aspects.size());
    auto second = (first + 1 + rng.below(choices.focus_aspects.size() - 1)) %
                  choices.focus_aspects.size();
    p.focus_aspects = {choices.focus_aspects[first], choices.focus_aspects[second]};
    return p;
}

}  // namespace

DatasetBundle generate_fixture(const FixtureOptions& options) {
    if (options.n_users < 1) {
        throw InvalidArgument("generate_fixture: n_users must be >= 1");
    }
    if (options.n_products < 10) {
        throw InvalidArgument("generate_fixture: n_products must be >= 10");
    }
    if (options.categories.empty()) {
        throw InvalidArgument("generate_fixture: empty category set");
    }
    Rng rng(options.seed);
    const auto n_categories = options.categories.size();

    // Catalog
    std::vector<Product> products;
    std::vector<ProductSeed> seeds;
    std::vector<std::vector<std::size_t>> by_category(n_categories);
    std::set<std::string> used_ids;
    for (int i = 0; i < options.n_products; ++i) {
        const auto category_index = static_cast<std::size_t>(i) % n_categories;
        const auto& vocab = vocabulary_for(category_index);
        ProductSeed seed{category_index, rng.pick(vocab.nouns), rng.pick(kAdjectives),
                         rng.pick(kBrands)};
        Product p;
        p.product_id = product_id_for(rng, used_ids);
        std::string code = std::string(1, static_cast<char>('a' + rng.below(26))) +
                           to_base36(static_cast<std::size_t>(i) + 36);
        p.title = std::string(seed.brand) + " " + seed.adjective + " " + seed.noun + " " + code;
        p.category = options.categories[category_index];
        if (!rng.chance(1, 9)) {
            p.price = static_cast<double>(99 + rng.below(9000)) / 100.0;
        }
        if (!rng.chance(1, 8)) {
            p.average_rating = 1.0 + static_cast<double>(rng.below(41)) / 10.0;
        }
        p.rating_count = static_cast<std::int64_t>(rng.below(5000));
        p.store = std::string(seed.brand) + " Store";
        const auto n_features = 2 + rng.below(2);
        for (std::size_t f = 0; f < n_features; ++f) p.features.emplace_back(rng.pick(kFeatures));
        p.description = "A " + std::string(seed.adjective) + " " + seed.noun + " from " +
                        seed.brand + " designed for " + vocab.use + ".";
        by_category[category_index].push_back(products.size());
        products.push_back(std::move(p));
        seeds.push_back(seed);
    }

    // Fixed successor per product (next one in the same category) gives the
    // behavior sequences learnable transitions.
    std::vector<std::size_t> successor(products.size());
    for (const auto& members : by_category) {
        for (std::size_t k = 0; k < members.size(); ++k) {
            successor[members[k]] = members[(k + 1) % members.size()];
        }
    }

    DatasetBundle bundle;
    bundle.split = options.split;
    for (int u = 0; u < options.n_users; ++u) {
        UserRecord user;
        char id_buf[16];
        std::snprintf(id_buf, sizeof id_buf, "U%03d", u + 1);
        user.user_id = id_buf;
        const auto favourite = rng.below(n_categories);
        const auto& favourite_members = by_category[favourite];
        const char* favourite_brand = rng.pick(kBrands);

        const auto length = 10 + rng.below(11);
        std::vector<BehaviorRecord> behaviors;
        std::int64_t t = 1'600'000'000 + static_cast<std::int64_t>(u) * 1000 +
                         static_cast<std::int64_t>(rng.below(86'400));
        std::size_t current = favourite_members.empty() ? rng.below(products.size())
                                                        : rng.pick(favourite_members);
        for (std::size_t k = 0; k < length; ++k) {
            behaviors.push_back(make_behavior(rng, products[current], seeds[current], t));
            t += 86'400 * static_cast<std::int64_t>(1 + rng.below(30));
            if (rng.chance(6, 10)) {
                current = successor[current];
            } else if (rng.chance(7, 10) && !favourite_members.empty()) {
                current = rng.pick(favourite_members);
            } else {
                current = rng.below(products.size());
            }
        }
        auto split = chronological_split(behaviors);
        user.history = std::move(split.history);
        user.train = std::move(split.train);
        user.test = std::move(split.test);
        user.profile = make_profile(rng, options.categories, favourite, favourite_brand);
        bundle.users.push_back(std::move(user));
    }

    std::unordered_map<std::string, std::size_t> ordinal;
    for (std::size_t i = 0; i < products.size(); ++i) ordinal.emplace(products[i].product_id, i);

    for (const auto& user : bundle.users) {
        const auto& block = options.split == Split::test ? user.test : user.train;
        if (block.empty()) continue;
        const auto focus = lower_copy(user.profile.focus_aspects.front());

        const auto& search_target = block.front();
        const auto& st = seeds[ordinal.at(search_target.product_id)];
        Instruction search;
        search.instruction_id = user.user_id + "-search";
        search.user_id = user.user_id;
        search.task_kind = TaskKind::search;
        search.text = std::string(rng.pick(kSearchOpeners)) + " a " + st.adjective + " " + st.noun +
                      ", ideally something where the " + focus + " is right for me.";
        search.ground_truth = search_target.product_id;
        bundle.instructions.push_back(std::move(search));

        const auto& rec_target = block.back();
        const auto& rt = seeds[ordinal.at(rec_target.product_id)];
        Instruction rec;
        rec.instruction_id = user.user_id + "-recommendation";
        rec.user_id = user.user_id;
        rec.task_kind = TaskKind::recommendation;
        rec.text = "Can you recommend something I might like next? Lately I have been into " +
                   lower_copy(options.categories[rt.category_index]) + " and I care about " + focus +
                   ".";
        rec.ground_truth = rec_target.product_id;
        bundle.instructions.push_back(std::move(rec));

        const auto& review_target = block.front();
        const auto& vt = seeds[ordinal.at(review_target.product_id)];
        Instruction review;
        review.instruction_id = user.user_id + "-review";
        review.user_id = user.user_id;
        review.task_kind = TaskKind::review;
        review.text = "Please help me write a review for the " + std::string(vt.noun) +
                      " I just bought; overall it felt " + sentiment_word(review_target.rating) +
                      " to me.";
        review.ground_truth = review_target.review_text;
        review.product_id = review_target.product_id;
        bundle.instructions.push_back(std::move(review));
    }

    bundle.catalog = Catalog(std::move(products));
    return bundle;
}

DatasetBundle generate_fixture(std::uint64_t seed, int n_users, int n_products) {
    FixtureOptions options;
    options.seed = seed;
    options.n_users = n_users;
    options.n_products = n_products;
    return generate_fixture(options);
}

}  // namespace pwab::corpus

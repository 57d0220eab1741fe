#include <pwab/corpus.hpp>

namespace pwab::corpus {

namespace {

std::string_view pick(Level level, std::string_view high, std::string_view medium,
                      std::string_view low) {
    switch (level) {
        case Level::high: return high;
        case Level::medium: return medium;
        case Level::low: return low;
    }
    return medium;
}

}  // namespace

const ProfileChoices& profile_choices() {
    static const ProfileChoices choices{
        {"Female", "Male"},
        {"Under 18", "18-24", "25-34", "35-44", "45-49", "50-55", "56+"},
        {"Academic/Educator", "Artist", "Clerical/admin", "College/grad student",
         "Customer service", "Doctor/health care", "Executive/managerial", "Farmer", "Homemaker",
         "K-12 student", "Lawyer", "Programmer", "Retired", "Sales/Marketing", "Scientist",
         "Self-employed", "Technician/Engineer", "Tradesman/Craftsman", "Unemployed", "Writer",
         "Other"},
        {"Average Rating", "Number of Ratings", "Price", "Store", "Material", "Size", "Weight",
         "Brand"},
    };
    return choices;
}

std::string_view ProfileChoices::price_sensitivity(Level level) const {
    return pick(level,
                "A Price-Conscious Shopper who is very sensitive to cost and seeks the best deals.",
                "A Balanced Buyer who considers price but also values quality and features.",
                "A Value-Driven Consumer who prioritizes quality and features over price.");
}

std::string_view ProfileChoices::diversity(Level level) const {
    return pick(
        level,
        "A Highly Adventurous Explorer eager to discover diverse products across categories. "
        "They often seek recommendations, and purchase a wide variety of items with varying "
        "ratings, and the user's own ratings may often differ from the average. Their reviews "
        "are detailed and enthusiastic, reflecting their unique tastes and enjoyment of variety.",
        "A Balanced Seeker who enjoys trying new products but also values familiarity. They "
        "appreciate targeted recommendations, purchase a moderate number of items with solid "
        "ratings and a reasonable number of ratings, and their reviews balance detailed feedback "
        "with concise, practical comments.",
        "A Meticulously Selective Buyer who sticks to tried-and-true products, showing little "
        "interest in new options. They purchase fewer items, favoring those with high ratings and "
        "a large number of ratings. Their own ratings are often very close to or slightly above "
        "the average, and their reviews are thoughtful and focused on familiar products.");
}

std::string_view ProfileChoices::interaction(Level level) const {
    return pick(
        level,
        "A Thorough Conversationalist who enjoys detailed discussions, exploring all aspects of "
        "a product or service. They provide extensive reviews and value comprehensive support, "
        "engaging in multiple rounds of communication.",
        "A Moderate Engager who balances simplicity with detail. They prefer clear communication "
        "but can engage in detailed exchanges when necessary. They provide reviews that are a mix "
        "of concise observations and some detailed insights, especially if they have strong "
        "feelings about a product.",
        "A Minimalist Interactor who values simplicity and efficiency. They prefer quick, "
        "straightforward interactions and leave brief, to-the-point reviews, focusing only on "
        "essential product aspects.");
}

}  // namespace pwab::corpus

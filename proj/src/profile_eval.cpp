#include <pwab/benchgen.hpp>
#include <pwab/eval.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <regex>

namespace pwab::eval {

namespace {

// Fisher-Yates with plain modulo; stable across standard libraries.
std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

}  // namespace

double profile_behavior_match_task(const std::vector<MatchTrial>& trials, const Chooser& chooser,
                                   std::uint64_t seed) {
    if (trials.empty()) throw InvalidArgument("profile_behavior_match_task: no trials");
    std::mt19937_64 rng(seed);
    std::size_t correct = 0;
    for (const auto& t : trials) {
        if (t.true_index >= t.candidates.size()) throw InvalidArgument("match trial: true_index out of range");
        const auto p = permutation(t.candidates.size(), rng);
        MatchTrial shuffled{t.profile, {}, 0};
        for (std::size_t i = 0; i < p.size(); ++i) {
            shuffled.candidates.push_back(t.candidates[p[i]]);
            if (p[i] == t.true_index) shuffled.true_index = i;
        }
        if (chooser(shuffled) == shuffled.true_index) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(trials.size());
}

std::vector<MatchTrial> build_match_trials(const corpus::DatasetBundle& bundle, std::size_t negatives,
                                           std::uint64_t seed) {
    const auto& users = bundle.users;
    if (users.size() < negatives + 1) {
        throw InvalidArgument("need at least " + std::to_string(negatives + 1) + " users for " +
                              std::to_string(negatives) + " negatives");
    }
    std::vector<std::string> histories;
    for (const auto& u : users) histories.push_back(benchgen::format_history(u, bundle.catalog));
    std::mt19937_64 rng(seed);
    std::vector<MatchTrial> trials;
    for (std::size_t u = 0; u < users.size(); ++u) {
        MatchTrial t{benchgen::format_profile(users[u].profile), {histories[u]}, 0};
        std::vector<std::size_t> others;
        for (std::size_t v = 0; v < users.size(); ++v) {
            if (v != u) others.push_back(v);
        }
        for (std::size_t i = 0; i < negatives; ++i) {
            const auto j = i + static_cast<std::size_t>(rng() % (others.size() - i));
            std::swap(others[i], others[j]);
            t.candidates.push_back(histories[others[i]]);
        }
        trials.push_back(std::move(t));
    }
    return trials;
}

RankMetrics profile_product_rank_task(const std::string& profile,
                                      const std::vector<corpus::ProductId>& positives,
                                      const std::vector<corpus::ProductId>& negatives, const Ranker& ranker,
                                      std::uint64_t seed, std::size_t k) {
    std::vector<corpus::ProductId> items = positives;
    items.insert(items.end(), negatives.begin(), negatives.end());
    std::mt19937_64 rng(seed);
    const auto p = permutation(items.size(), rng);
    RankTrial trial{profile, {}, {positives.begin(), positives.end()}};
    for (auto i : p) trial.items.push_back(items[i]);

    const auto ranked = ranker(trial);
    auto expected = items;
    auto got = ranked;
    std::sort(expected.begin(), expected.end());
    std::sort(got.begin(), got.end());
    if (expected != got) throw InvalidArgument("ranker output is not a permutation of the candidate items");
    return {ndcg_at_k(ranked, trial.positives, k), recall_at_k(ranked, trial.positives, k)};
}

Chooser policy_chooser(std::shared_ptr<agent::Policy> policy) {
    return [policy](const MatchTrial& t) -> std::size_t {
        std::string prompt = "User profile:\n" + t.profile + "\n\nCandidate purchase histories:\n";
        for (std::size_t i = 0; i < t.candidates.size(); ++i) {
            prompt += "\n[" + std::to_string(i + 1) + "]\n" + t.candidates[i];
        }
        prompt += "\nWhich candidate history belongs to the user with this profile? "
                  "Answer with the candidate number only.";
        const auto text = policy->complete({{agent::Role::user, prompt}}, 1).front();
        std::smatch m;
        if (!std::regex_search(text, m, std::regex("[0-9]+"))) return t.candidates.size();
        const auto n = std::stoul(m.str());
        return n >= 1 && n <= t.candidates.size() ? n - 1 : t.candidates.size();
    };
}

Ranker policy_ranker(std::shared_ptr<agent::Policy> policy, const corpus::Catalog& catalog) {
    return [policy, &catalog](const RankTrial& t) {
        std::string prompt = "User profile:\n" + t.profile + "\n\nCandidate products:\n";
        for (const auto& id : t.items) {
            prompt += "\n" + id + "\n" + benchgen::format_product(catalog.at(id)) + "\n";
        }
        prompt += "\nRank the candidate products by how likely this user is to buy them. "
                  "Answer with the product ids, most likely first.";
        const auto text = policy->complete({{agent::Role::user, prompt}}, 1).front();
        // Ids in order of first appearance; unmentioned items keep their order at the end.
        std::vector<std::pair<std::size_t, corpus::ProductId>> found;
        for (const auto& id : t.items) {
            const auto pos = text.find(id);
            found.emplace_back(pos == std::string::npos ? text.size() : pos, id);
        }
        std::stable_sort(found.begin(), found.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<corpus::ProductId> out;
        for (auto& f : found) out.push_back(std::move(f.second));
        return out;
    };
}

}  // namespace pwab::eval

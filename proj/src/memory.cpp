#include <pwab/memory.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

namespace pwab::memory {

namespace {

std::string fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string price_text(const std::optional<double>& price) {
    return price ? "$" + fixed(*price, 2) : std::string("unknown");
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

}  // namespace

std::string serialize_entry(const MemoryEntry& e) {
    const auto& p = e.purchase;
    FeatureRecord r = all_features(e);
    r.fields.insert(r.fields.begin() + 5, {"review_title", one_line(e.review_title)});
    return serialize_features(r) + " | average_rating: " +
           (p.average_rating ? fixed(*p.average_rating, 1) : std::string("unknown"));
}

MemoryBank build_memory_bank(const corpus::UserRecord& user, const corpus::Catalog& catalog,
                             const retrieval::Embedder& embedder) {
    MemoryBank bank;
    bank.user_id = user.user_id;
    std::vector<std::string> texts;
    for (const auto& b : user.history) {
        const auto* product = catalog.find(b.product_id);
        if (!product) {
            throw ValidationError("user " + user.user_id + " references unknown product " + b.product_id);
        }
        bank.entries.push_back({*product, b.rating, b.review_title, b.review_text, b.timestamp});
        texts.push_back(serialize_entry(bank.entries.back()));
    }
    if (!texts.empty()) bank.embeddings = embedder.embed_batch(texts);
    if (bank.embeddings.size() != bank.entries.size()) {
        throw Error("embedder returned " + std::to_string(bank.embeddings.size()) + " vectors for " +
                    std::to_string(bank.entries.size()) + " entries");
    }
    return bank;
}

bool FeatureRecord::has(std::string_view field) const {
    return std::any_of(fields.begin(), fields.end(), [&](const auto& f) { return f.first == field; });
}

const std::vector<std::string>& feature_fields(corpus::TaskKind kind) {
    static const std::vector<std::string> search = {"title", "category", "price", "store"};
    static const std::vector<std::string> rec = {"title", "category", "parent_asin"};
    static const std::vector<std::string> review = {"rating", "review_text"};
    switch (kind) {
        case corpus::TaskKind::search: return search;
        case corpus::TaskKind::recommendation: return rec;
        case corpus::TaskKind::review: return review;
    }
    return search;
}

FeatureRecord all_features(const MemoryEntry& e) {
    const auto& p = e.purchase;
    return {{{"title", one_line(p.title)},
             {"category", p.category},
             {"price", price_text(p.price)},
             {"store", one_line(p.store)},
             {"parent_asin", p.product_id},
             {"rating", fixed(e.rating, 1)},
             {"review_text", one_line(e.review_text)}}};
}

FeatureRecord extract_features(const FeatureRecord& record, corpus::TaskKind kind) {
    const auto& keep = feature_fields(kind);
    FeatureRecord out;
    for (const auto& f : record.fields) {
        if (std::find(keep.begin(), keep.end(), f.first) != keep.end()) out.fields.push_back(f);
    }
    return out;
}

FeatureRecord extract_features(const MemoryEntry& entry, corpus::TaskKind kind) {
    return extract_features(all_features(entry), kind);
}

std::string serialize_features(const FeatureRecord& record) {
    std::string out;
    for (const auto& [k, v] : record.fields) {
        if (!out.empty()) out += " | ";
        out += k + ": " + v;
    }
    return out;
}

std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

void RetrievalConfig::validate() const {
    if (k < 1) throw InvalidArgument("memory K must be >= 1");
    if (token_budget < 1) throw InvalidArgument("memory token budget must be >= 1");
}

std::string TaskMemory::serialize() const {
    std::string out;
    for (const auto& e : entries) {
        if (!out.empty()) out += '\n';
        out += serialize_features(e.features);
    }
    return out;
}

std::vector<std::size_t> rank_by_similarity(const MemoryBank& bank,
                                            const retrieval::EmbeddingVector& query) {
    // Similarities are compared at 1e-12 resolution so that mathematically
    // equal scores tie regardless of summation order.
    std::vector<double> sims(bank.entries.size());
    for (std::size_t i = 0; i < sims.size(); ++i) {
        sims[i] = std::round(retrieval::cosine_sim(query, bank.embeddings[i]) * 1e12);
    }
    std::vector<std::size_t> order(sims.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        if (bank.entries[a].timestamp != bank.entries[b].timestamp) {
            return bank.entries[a].timestamp > bank.entries[b].timestamp;
        }
        return a > b;
    });
    return order;
}

TaskMemory retrieve_task_memory(const MemoryBank& bank, const retrieval::EmbeddingVector& query,
                                corpus::TaskKind kind, const RetrievalConfig& config) {
    config.validate();
    TaskMemory out;
    out.kind = kind;
    out.token_budget = config.token_budget;
    if (bank.entries.empty()) return out;

    auto order = rank_by_similarity(bank, query);
    if (order.size() > config.k) order.resize(config.k);
    std::size_t used = 0;
    for (auto idx : order) {
        TaskMemoryEntry e{extract_features(bank.entries[idx], kind), idx, bank.entries[idx].timestamp,
                          retrieval::cosine_sim(query, bank.embeddings[idx])};
        // Entries are newline-joined, so token counts simply add up.
        const auto tokens = count_tokens(serialize_features(e.features));
        if (used + tokens > config.token_budget) break;
        used += tokens;
        out.entries.push_back(std::move(e));
    }
    return out;
}

TaskMemory retrieve_task_memory(const MemoryBank& bank, std::string_view instruction_text,
                                corpus::TaskKind kind, const RetrievalConfig& config,
                                const retrieval::Embedder& embedder) {
    return retrieve_task_memory(bank, embedder.embed(instruction_text), kind, config);
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::none: return "none";
        case Strategy::random: return "random";
        case Strategy::last: return "last";
        case Strategy::relevant: return "relevant";
        case Strategy::puma: return "puma";
    }
    return "none";
}

Strategy parse_strategy(std::string_view text) {
    for (auto s : {Strategy::none, Strategy::random, Strategy::last, Strategy::relevant, Strategy::puma}) {
        if (to_string(s) == text) return s;
    }
    throw InvalidArgument("unknown memory strategy '" + std::string(text) +
                          "' (expected none, random, last, relevant or puma)");
}

std::vector<std::size_t> select_baseline_memory(const MemoryBank& bank, Strategy strategy,
                                                std::size_t n, std::uint64_t seed,
                                                const retrieval::EmbeddingVector& query) {
    const std::size_t size = bank.entries.size();
    const std::size_t take = std::min(n, size);
    std::vector<std::size_t> out;
    switch (strategy) {
        case Strategy::none:
            break;
        case Strategy::random: {
            std::vector<std::size_t> pool(size);
            std::iota(pool.begin(), pool.end(), 0);
            std::mt19937_64 rng(seed);
            // Partial Fisher-Yates with plain modulo so selections are stable
            // across standard library implementations.
            for (std::size_t i = 0; i < take; ++i) {
                const auto j = i + static_cast<std::size_t>(rng() % (size - i));
                std::swap(pool[i], pool[j]);
                out.push_back(pool[i]);
            }
            break;
        }
        case Strategy::last:
            for (std::size_t i = 0; i < take; ++i) out.push_back(size - 1 - i);
            break;
        case Strategy::relevant: {
            if (query.empty() && size > 0) {
                throw InvalidArgument("relevant memory needs an instruction embedding");
            }
            out = rank_by_similarity(bank, query);
            out.resize(take);
            break;
        }
        case Strategy::puma:
            throw InvalidArgument("puma is not a baseline memory strategy");
    }
    return out;
}

std::string serialize_entries(const MemoryBank& bank, const std::vector<std::size_t>& indices) {
    std::string out;
    for (auto i : indices) {
        if (!out.empty()) out += '\n';
        out += serialize_entry(bank.entries.at(i));
    }
    return out;
}

}  // namespace pwab::memory

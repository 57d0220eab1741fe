#pragma once
// Per-user memory bank of purchases and reviews, task-specific retrieval with
// per-kind feature extraction and a token budget, and the baseline memory
// strategies (none / random / last / relevant).

#include <pwab/corpus.hpp>
#include <pwab/retrieval.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pwab::memory {

struct MemoryEntry {
    corpus::Product purchase;
    double rating = 0.0;
    std::string review_title;
    std::string review_text;
    std::int64_t timestamp = 0;

    bool operator==(const MemoryEntry&) const = default;
};

// Full labeled text of an entry; this is what gets embedded.
std::string serialize_entry(const MemoryEntry& entry);

struct MemoryBank {
    std::string user_id;
    std::vector<MemoryEntry> entries;  // ascending timestamp
    std::vector<retrieval::EmbeddingVector> embeddings;

    bool operator==(const MemoryBank&) const = default;
};

// One entry per history behavior. Throws ValidationError on a dangling
// product reference.
MemoryBank build_memory_bank(const corpus::UserRecord& user, const corpus::Catalog& catalog,
                             const retrieval::Embedder& embedder);

// Ordered (field, value) pairs. Field names: title, category, price, store,
// parent_asin, rating, review_text.
struct FeatureRecord {
    std::vector<std::pair<std::string, std::string>> fields;

    bool operator==(const FeatureRecord&) const = default;
    bool has(std::string_view field) const;
};

// Field set kept for each task kind.
const std::vector<std::string>& feature_fields(corpus::TaskKind kind);

FeatureRecord all_features(const MemoryEntry& entry);
FeatureRecord extract_features(const MemoryEntry& entry, corpus::TaskKind kind);
// Projection; extracting twice is the same as extracting once.
FeatureRecord extract_features(const FeatureRecord& record, corpus::TaskKind kind);

// "field: value | field: value"
std::string serialize_features(const FeatureRecord& record);

// Whitespace-delimited piece count.
std::size_t count_tokens(std::string_view text);

struct RetrievalConfig {
    std::size_t k = 50;
    std::size_t token_budget = 768;

    static RetrievalConfig single_turn() { return {50, 768}; }
    static RetrievalConfig multi_turn() { return {20, 768}; }
    void validate() const;  // throws InvalidArgument
};

struct TaskMemoryEntry {
    FeatureRecord features;
    std::size_t bank_index = 0;
    std::int64_t timestamp = 0;
    double similarity = 0.0;
};

struct TaskMemory {
    corpus::TaskKind kind = corpus::TaskKind::search;
    std::size_t token_budget = 0;
    std::vector<TaskMemoryEntry> entries;  // descending similarity

    // One entry per line; empty string for no entries.
    std::string serialize() const;
    std::size_t token_count() const { return count_tokens(serialize()); }
};

// Bank indices by descending cosine similarity to `query` (compared at 1e-12
// resolution), ties newer first, then later in the bank.
std::vector<std::size_t> rank_by_similarity(const MemoryBank& bank,
                                            const retrieval::EmbeddingVector& query);

// Top-K by similarity, per-kind extraction, then drop the lowest-similarity
// entries until the serialized text fits the budget.
TaskMemory retrieve_task_memory(const MemoryBank& bank, const retrieval::EmbeddingVector& query,
                                corpus::TaskKind kind, const RetrievalConfig& config);
TaskMemory retrieve_task_memory(const MemoryBank& bank, std::string_view instruction_text,
                                corpus::TaskKind kind, const RetrievalConfig& config,
                                const retrieval::Embedder& embedder);

enum class Strategy { none, random, last, relevant, puma };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);  // throws InvalidArgument

// Bank indices for a baseline strategy (puma is not a baseline). `query` is
// required for relevant. n larger than the bank returns every entry.
std::vector<std::size_t> select_baseline_memory(const MemoryBank& bank, Strategy strategy,
                                                std::size_t n, std::uint64_t seed,
                                                const retrieval::EmbeddingVector& query = {});

// Full entries, one per line.
std::string serialize_entries(const MemoryBank& bank, const std::vector<std::size_t>& indices);

}  // namespace pwab::memory

#pragma once
// Lexical ranking (Okapi BM25) over the catalog and the embedding provider
// interface used for memory retrieval and review scoring.

#include <pwab/corpus.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pwab::retrieval {

// Lower-cased maximal ASCII alphanumeric runs, in order.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    bool operator==(const Bm25Params&) const = default;
};

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

enum class IndexField { title, category, store, features, description };

const std::vector<IndexField>& default_index_fields();

// Text fed to the index for one product, fields joined by single spaces.
std::string indexed_text(const corpus::Product& product, const std::vector<IndexField>& fields);

struct ScoredProduct {
    corpus::ProductId product_id;
    double score = 0.0;

    bool operator==(const ScoredProduct&) const = default;
};

class Bm25Index {
public:
    // Throws InvalidArgument on an empty catalog.
    static Bm25Index build(const corpus::Catalog& catalog,
                           const std::vector<IndexField>& fields = default_index_fields(),
                           Bm25Params params = {});

    std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }
    const std::vector<corpus::ProductId>& doc_ids() const noexcept { return doc_ids_; }
    const Bm25Params& params() const noexcept { return params_; }
    // Empty list for unknown terms.
    const std::vector<Posting>& postings(const std::string& term) const;
    std::size_t vocabulary_size() const noexcept { return postings_.size(); }

    double idf(const std::string& term) const;
    // Sum over query terms (duplicates count again); unknown terms add 0.
    double score(const std::vector<std::string>& query_terms, std::size_t doc) const;

    // Term-at-a-time accumulation over postings; descending score, ties by
    // ascending product_id; min(k, doc_count) entries.
    std::vector<ScoredProduct> query_top_k(std::string_view query, std::size_t k) const;

    nlohmann::json to_json() const;
    static Bm25Index from_json(const nlohmann::json& j);

    bool operator==(const Bm25Index&) const = default;

private:
    Bm25Params params_;
    std::vector<corpus::ProductId> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    // term frequency of each term per document, for direct scoring
    std::vector<std::unordered_map<std::string, std::uint32_t>> doc_terms_;
};

// ---------------------------------------------------------------------------
// Embeddings

using EmbeddingVector = std::vector<double>;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    // Unit-norm vector, or the zero vector for text without tokens.
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
};

// FNV-1a 64-bit, used for stable term bucketing.
std::uint64_t fnv1a64(std::string_view bytes);

// Term-frequency vector over hashed buckets, L2-normalized.
class HashedTfEmbedder final : public Embedder {
public:
    explicit HashedTfEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}

    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(std::string_view text) const override;
    std::size_t bucket(std::string_view term) const { return fnv1a64(term) % dimension_; }

private:
    std::size_t dimension_;
};

struct HttpEndpoint {
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/embeddings";
    std::string api_key;   // sent as a bearer token when non-empty
    int timeout_seconds = 60;
    int max_attempts = 3;
};

// POST {"texts": [...]} -> {"vectors": [[...], ...]}. Vectors are
// re-normalized locally so the norm invariant holds for any service.
class HttpEmbeddingClient final : public Embedder {
public:
    HttpEmbeddingClient(HttpEndpoint endpoint, std::size_t dimension);

    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(std::string_view text) const override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;

private:
    HttpEndpoint endpoint_;
    std::size_t dimension_;
};

// dot(a,b)/(|a||b|), 0 when either norm is 0. Throws InvalidArgument on
// dimension mismatch.
double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace pwab::retrieval

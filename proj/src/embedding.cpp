#include <pwab/retrieval.hpp>

#include "http_post.hpp"

#include <algorithm>
#include <cmath>

namespace pwab::retrieval {

namespace {

void normalize(EmbeddingVector& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
}

}  // namespace

std::vector<EmbeddingVector> Embedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

EmbeddingVector HashedTfEmbedder::embed(std::string_view text) const {
    EmbeddingVector v(dimension_, 0.0);
    for (const auto& term : tokenize(text)) v[bucket(term)] += 1.0;
    normalize(v);
    return v;
}

HttpEmbeddingClient::HttpEmbeddingClient(HttpEndpoint endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)), dimension_(dimension) {
    if (dimension_ == 0) throw InvalidArgument("embedding dimension must be >= 1");
}

EmbeddingVector HttpEmbeddingClient::embed(std::string_view text) const {
    return embed_batch({std::string(text)}).front();
}

std::vector<EmbeddingVector> HttpEmbeddingClient::embed_batch(
    const std::vector<std::string>& texts) const {
    detail::PostTarget target{endpoint_.base_url, endpoint_.path, endpoint_.api_key,
                              endpoint_.timeout_seconds, endpoint_.max_attempts};
    auto response = detail::post_json(target, {{"texts", texts}});
    auto vectors = response.at("vectors").get<std::vector<EmbeddingVector>>();
    if (vectors.size() != texts.size()) {
        throw Error("embedding service returned " + std::to_string(vectors.size()) +
                    " vectors for " + std::to_string(texts.size()) + " texts");
    }
    for (auto& v : vectors) {
        if (v.size() != dimension_) {
            throw Error("embedding service returned dimension " + std::to_string(v.size()) +
                        ", expected " + std::to_string(dimension_));
        }
        normalize(v);
    }
    return vectors;
}

double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("cosine_sim: dimension mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace pwab::retrieval

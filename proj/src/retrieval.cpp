#include <pwab/retrieval.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace pwab::retrieval {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    for (unsigned char c : text) {
        if (c < 0x80 && std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

const std::vector<IndexField>& default_index_fields() {
    static const std::vector<IndexField> fields = {IndexField::title, IndexField::category,
                                                   IndexField::store, IndexField::features,
                                                   IndexField::description};
    return fields;
}

std::string indexed_text(const corpus::Product& product, const std::vector<IndexField>& fields) {
    std::string text;
    auto append = [&](const std::string& part) {
        if (part.empty()) return;
        if (!text.empty()) text += ' ';
        text += part;
    };
    for (auto field : fields) {
        switch (field) {
            case IndexField::title: append(product.title); break;
            case IndexField::category: append(product.category); break;
            case IndexField::store: append(product.store); break;
            case IndexField::features:
                for (const auto& f : product.features) append(f);
                break;
            case IndexField::description: append(product.description); break;
        }
    }
    return text;
}

Bm25Index Bm25Index::build(const corpus::Catalog& catalog, const std::vector<IndexField>& fields,
                           Bm25Params params) {
    if (catalog.empty()) {
        throw InvalidArgument("build_bm25_index: empty catalog");
    }
    Bm25Index index;
    index.params_ = params;
    const auto n = catalog.size();
    index.doc_ids_.reserve(n);
    index.doc_lengths_.reserve(n);
    index.doc_terms_.resize(n);
    std::uint64_t total_length = 0;
    for (std::size_t d = 0; d < n; ++d) {
        const auto& product = catalog.products()[d];
        auto terms = tokenize(indexed_text(product, fields));
        index.doc_ids_.push_back(product.product_id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
        total_length += terms.size();
        // std::map keeps posting insertion order independent of hashing.
        std::map<std::string, std::uint32_t> tf;
        for (auto& t : terms) ++tf[t];
        for (const auto& [term, count] : tf) {
            index.postings_[term].push_back({static_cast<std::uint32_t>(d), count});
        }
        index.doc_terms_[d] = std::unordered_map<std::string, std::uint32_t>(tf.begin(), tf.end());
    }
    index.avg_doc_length_ = static_cast<double>(total_length) / static_cast<double>(n);
    return index;
}

const std::vector<Posting>& Bm25Index::postings(const std::string& term) const {
    static const std::vector<Posting> empty;
    auto it = postings_.find(term);
    return it == postings_.end() ? empty : it->second;
}

double Bm25Index::idf(const std::string& term) const {
    const double n = static_cast<double>(doc_count());
    const double df = static_cast<double>(postings(term).size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

namespace {

double term_weight(double idf, double tf, double doc_len, double avg_len, const Bm25Params& p) {
    const double norm = avg_len > 0 ? doc_len / avg_len : 0.0;
    return idf * tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

}  // namespace

double Bm25Index::score(const std::vector<std::string>& query_terms, std::size_t doc) const {
    if (doc >= doc_count()) {
        throw InvalidArgument("bm25_score: doc ordinal out of range");
    }
    double total = 0.0;
    const auto& terms = doc_terms_[doc];
    for (const auto& q : query_terms) {
        auto it = terms.find(q);
        if (it == terms.end()) continue;
        total += term_weight(idf(q), it->second, doc_lengths_[doc], avg_doc_length_, params_);
    }
    return total;
}

std::vector<ScoredProduct> Bm25Index::query_top_k(std::string_view query, std::size_t k) const {
    if (k == 0) {
        throw InvalidArgument("query_top_k: k must be >= 1");
    }
    const auto terms = tokenize(query);
    std::vector<double> acc(doc_count(), 0.0);
    for (const auto& q : terms) {
        const auto& list = postings(q);
        if (list.empty()) continue;
        const double w = idf(q);
        for (const auto& p : list) {
            acc[p.doc] += term_weight(w, p.tf, doc_lengths_[p.doc], avg_doc_length_, params_);
        }
    }
    std::vector<std::uint32_t> order(doc_count());
    for (std::uint32_t d = 0; d < order.size(); ++d) order[d] = d;
    const auto take = std::min(k, order.size());
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (acc[a] != acc[b]) return acc[a] > acc[b];
        return doc_ids_[a] < doc_ids_[b];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      better);
    std::vector<ScoredProduct> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back({doc_ids_[order[i]], acc[order[i]]});
    return out;
}

nlohmann::json Bm25Index::to_json() const {
    // Sorted term order so the file bytes are stable.
    std::map<std::string, const std::vector<Posting>*> sorted;
    for (const auto& [term, list] : postings_) sorted.emplace(term, &list);
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, list] : sorted) {
        auto arr = nlohmann::json::array();
        for (const auto& p : *list) arr.push_back({p.doc, p.tf});
        postings[term] = std::move(arr);
    }
    return {{"k1", params_.k1},
            {"b", params_.b},
            {"doc_count", doc_count()},
            {"avg_doc_length", avg_doc_length_},
            {"doc_ids", doc_ids_},
            {"doc_lengths", doc_lengths_},
            {"postings", std::move(postings)}};
}

Bm25Index Bm25Index::from_json(const nlohmann::json& j) {
    Bm25Index index;
    index.params_.k1 = j.at("k1").get<double>();
    index.params_.b = j.at("b").get<double>();
    index.doc_ids_ = j.at("doc_ids").get<std::vector<corpus::ProductId>>();
    index.doc_lengths_ = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
    if (index.doc_ids_.size() != index.doc_lengths_.size() || index.doc_ids_.empty()) {
        throw ParseError("bm25 index: doc_ids/doc_lengths mismatch");
    }
    index.doc_terms_.resize(index.doc_ids_.size());
    std::uint64_t total = 0;
    for (auto len : index.doc_lengths_) total += len;
    index.avg_doc_length_ = static_cast<double>(total) / static_cast<double>(index.doc_ids_.size());
    for (const auto& [term, arr] : j.at("postings").items()) {
        auto& list = index.postings_[term];
        for (const auto& entry : arr) {
            Posting p{entry.at(0).get<std::uint32_t>(), entry.at(1).get<std::uint32_t>()};
            if (p.doc >= index.doc_ids_.size()) throw ParseError("bm25 index: posting out of range");
            list.push_back(p);
            index.doc_terms_[p.doc][term] = p.tf;
        }
    }
    return index;
}

}  // namespace pwab::retrieval

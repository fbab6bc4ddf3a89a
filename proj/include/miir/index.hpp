#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "miir/analyzer.hpp"
#include "miir/corpus.hpp"
#include "miir/ranking.hpp"

namespace miir {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

struct TermWeight {
    std::string term;
    double weight = 0.0;
    bool operator==(const TermWeight&) const = default;
};

/// A query as a term distribution; weights sum to 1 for RM3 output.
struct WeightedQuery {
    std::vector<TermWeight> terms;  // sorted by term
    double weight_sum() const;
};

struct Rm3Params {
    std::size_t fb_docs = 10;
    std::size_t fb_terms = 10;
    double mix = 0.5;  // weight of the original query model
};

/// Inverted index over a passage collection with BM25 scoring and RM3
/// expansion. Built once, then immutable; concurrent searches are safe.
class InvertedIndex {
  public:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
        bool operator==(const Posting&) const = default;
    };

    static InvertedIndex build(const std::map<std::string, Passage>& passages, const Analyzer& analyzer);

    std::size_t num_passages() const { return pids_.size(); }
    double avg_length() const { return avg_length_; }
    std::size_t doc_frequency(const std::string& term) const;
    const std::string& pid(std::uint32_t doc) const { return pids_[doc]; }
    std::uint32_t length(std::uint32_t doc) const { return lengths_[doc]; }
    const Analyzer& analyzer() const { return analyzer_; }

    /// Okapi BM25 with the positive saturating idf `ln(1 + (N-df+0.5)/(df+0.5))`.
    /// Top-k by score, ties broken by ascending passage id; passages matching
    /// no query term never appear. Repeated query terms accumulate.
    Ranking bm25_search(const std::string& query_text, std::size_t k, Bm25Params params = {}) const;

    /// Like bm25_search but each term's contribution is scaled by its weight;
    /// non-positive weights are skipped. Tag "rm3".
    Ranking weighted_search(const WeightedQuery& query, std::size_t k, Bm25Params params = {},
                            const std::string& tag = "rm3") const;

    /// RM3 pseudo-relevance feedback expansion. The relevance model over the
    /// top fb_docs feedback passages (doc weights = normalized BM25 scores,
    /// term likelihood tf/len) is truncated to fb_terms and interpolated with
    /// the maximum-likelihood query model at weight `mix`. The result sums to
    /// 1. An empty first pass returns the original query model unchanged.
    WeightedQuery rm3_expand(const std::string& query_text, Rm3Params params = {}, Bm25Params bm25 = {}) const;

    /// Maximum-likelihood model of the analyzed query text (weights qtf/|q|).
    WeightedQuery query_model(const std::string& query_text) const;

    void save(const std::string& path) const;
    static InvertedIndex load(const std::string& path);

  private:
    InvertedIndex() = default;

    Ranking search_terms(const std::vector<std::pair<std::string, double>>& weighted_terms, std::size_t k,
                         Bm25Params params, const std::string& tag, const std::string& query_id) const;
    void rebuild_forward();

    Analyzer analyzer_;
    std::vector<std::string> pids_;        // doc -> passage id, ascending
    std::vector<std::uint32_t> lengths_;   // doc -> analyzed token count
    double avg_length_ = 0.0;
    std::map<std::string, std::vector<Posting>> postings_;       // term -> postings, docs ascending
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> forward_;  // doc -> (term idx, tf)
    std::vector<const std::string*> terms_;  // term idx -> term (into postings_ keys)
};

}  // namespace miir

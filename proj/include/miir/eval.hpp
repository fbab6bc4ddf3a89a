#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "miir/embed.hpp"
#include "miir/ranking.hpp"

namespace miir {

/// 1/rank of the first positive within the top k, else 0.
double mrr_at_k(const Ranking& ranking, const std::set<std::string>& positives, std::size_t k);

/// Binary-gain DCG with log2(rank+1) discount, normalized by the ideal DCG at
/// the same cutoff.
double ndcg_at_k(const Ranking& ranking, const std::set<std::string>& positives, std::size_t k);

/// Exact-match unigram METEOR: P=m/|hyp|, R=m/|ref|, F=10PR/(R+9P),
/// penalty=0.5*(chunks/m)^3, score=F*(1-penalty); 0 when nothing matches.
/// Tokens are lowercased whitespace words; the alignment is leftmost-greedy.
double meteor(const std::string& hypothesis, const std::string& reference);

/// Mean pairwise cosine between embeddings of aligned text lists.
double cosim(const std::vector<std::string>& questions, const std::vector<std::string>& references,
             const EmbeddingProvider& provider);

/// Shannon entropy (natural log) of the softmax distribution over the scores.
double ranking_entropy(const std::vector<double>& scores);

enum class RboMode { min, ext };

/// Rank-biased overlap with persistence p. `min` truncates the weighted
/// agreement sum at the shorter list; `ext` extrapolates the tail with the
/// final agreement value.
double rbo(const std::vector<std::string>& s, const std::vector<std::string>& t, double p, RboMode mode);
double rbo(const Ranking& s, const Ranking& t, double p, RboMode mode);

struct MetricReport {
    // metric name ("mrr@10", "ndcg@3", ...) -> per-query values and macro mean
    std::map<std::string, std::map<std::string, double>> per_query;
    std::map<std::string, double> macro;
    std::vector<std::size_t> mrr_cutoffs;
    std::vector<std::size_t> ndcg_cutoffs;
    double rbo_p = 0.9;
    std::string entropy_base = "e";
    std::size_t queries_evaluated = 0;
    std::size_t queries_without_positives = 0;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

/// Ranking metrics for one run, macro-averaged over the run's queries
/// (zero-scoring queries included). Queries lacking positives count as zero
/// and are tallied in queries_without_positives.
MetricReport evaluate_run(const std::map<std::string, Ranking>& run, const Qrels& qrels,
                          const std::vector<std::size_t>& mrr_cutoffs,
                          const std::vector<std::size_t>& ndcg_cutoffs);

}  // namespace miir

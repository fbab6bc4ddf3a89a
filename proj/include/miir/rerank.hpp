#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "miir/augment.hpp"
#include "miir/corpus.hpp"
#include "miir/embed.hpp"
#include "miir/index.hpp"
#include "miir/interact.hpp"
#include "miir/ranking.hpp"

namespace miir {

/// Scorer contract: a finite real interpretable as log p(relevant | q, p, cq, a),
/// deterministic for fixed inputs.
class PassageScorer {
  public:
    virtual ~PassageScorer() = default;
    virtual double score(const std::string& query_text, const Passage& passage,
                         const Interaction& interaction) const = 0;
    virtual std::string name() const = 0;
};

struct LocalScorerParams {
    double alpha = 1.0;  // weight of the normalized BM25 signal
    double beta = 2.0;   // weight of the signed facet-coverage signal
};

/// Deterministic local scorer:
///   s = log sigmoid(alpha * bm25n + beta * sign(answer) * coverage)
/// where bm25n is the passage's BM25 score min-max normalized over the cohort
/// ranking (constant cohorts map to 0.5) and coverage is the fraction of facet
/// words present in the passage. Scoring a passage outside the cohort is an
/// error: scores are cohort-relative.
class LocalInteractionScorer: public PassageScorer {
  public:
    LocalInteractionScorer(const Ranking& cohort, LocalScorerParams params = {});

    double score(const std::string& query_text, const Passage& passage,
                 const Interaction& interaction) const override;
    std::string name() const override { return "local"; }

    double normalized_bm25(const std::string& pid) const;
    static double facet_coverage(const Facet& facet, const Passage& passage);

  private:
    std::map<std::string, double> normalized_;
    LocalScorerParams params_;
};

/// Gateway /score verb over the rank prompt; responses must be finite and <= 0.
class RemoteInteractionScorer: public PassageScorer {
  public:
    explicit RemoteInteractionScorer(std::shared_ptr<GatewayClient> gateway);
    double score(const std::string& query_text, const Passage& passage,
                 const Interaction& interaction) const override;
    std::string name() const override { return "remote"; }

  private:
    std::shared_ptr<GatewayClient> gateway_;
};

double remote_score(const GatewayClient& gateway, const std::string& query_text,
                    const std::string& passage_text, const Interaction& interaction);

/// Rescores the ranking's passages under one interaction and re-sorts
/// descending. The sort is stable with respect to the incoming order, so tied
/// scores keep the original ranking's (passage-id-broken) order. Tag
/// "rerank:t=<turn>". Any scorer failure aborts the rerank.
Ranking rerank_once(const Ranking& ranking, const PassageScorer& scorer, const Query& query,
                    const std::map<std::string, Passage>& passages, const Interaction& interaction,
                    int turn = 1);

using ScorerFactory = std::function<std::unique_ptr<PassageScorer>(const Ranking& cohort)>;

struct SessionTurn {
    int turn = 0;
    Interaction interaction;
    Ranking ranking;  // by cumulative score after this turn
    double entropy = 0.0;
    std::optional<double> reciprocal_rank;  // of the first positive, full depth
};

struct Session {
    std::string query_id;
    Ranking initial;  // first-stage BM25, tag "bm25"
    double initial_entropy = 0.0;
    std::optional<double> initial_reciprocal_rank;
    std::vector<SessionTurn> turns;
    std::map<std::string, double> cumulative;  // pid -> summed per-turn log scores
    std::set<std::string> used_pids;           // facet source passages
};

struct SessionOptions {
    int t_max = 5;
    std::size_t depth = 100;
    std::size_t facet_k = 5;
    Bm25Params bm25;
    /// When true, turn t draws its facet from the t-th passage of the initial
    /// ranking instead of the top unused passage of the updated ranking.
    bool fixed_facet_list = false;
};

/// Multi-turn loop: per turn, pick the facet source passage, build the
/// interaction, add every candidate's per-turn log score to its cumulative
/// total, and re-sort. The candidate pool stays fixed at the initial
/// retrieval; sessions end early when facet sources are exhausted.
Session run_session(const Collection& collection, const InvertedIndex& index,
                    const EmbeddingProvider& provider, const QuestionGenerator& generator,
                    const UserSimulator& simulator, const ScorerFactory& scorer_factory, const Query& query,
                    SessionOptions options, std::uint64_t seed);

}  // namespace miir

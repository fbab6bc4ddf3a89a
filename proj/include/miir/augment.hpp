#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "miir/corpus.hpp"
#include "miir/embed.hpp"
#include "miir/index.hpp"
#include "miir/interact.hpp"

namespace miir {

struct AugmentCaps {
    std::optional<std::size_t> max_pos;  // per-query cap on positive facets
    std::optional<std::size_t> max_neg;
};

struct AugmentReport {
    std::size_t facet_failures = 0;
    std::size_t generation_failures = 0;
    std::vector<std::string> empty_queries;  // queries yielding zero interactions
};

struct AugmentedDataset {
    std::vector<Interaction> interactions;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

/// Stable per-query sampling key; drives cap sampling and intent selection so
/// results depend only on (seed, qid, salt, pid), not on thread interleaving.
std::uint64_t sample_key(std::uint64_t seed, const std::string& qid, std::string_view salt,
                         const std::string& pid);

/// Seeded choice of the intent passage among a query's positives.
std::optional<std::string> sample_intent_pid(const Judgment& judgment, std::uint64_t seed,
                                             const std::string& qid);

/// Offline augmentation: per query, facets from P+ and P-, one question per
/// facet, answers matched to facet polarity. Caps are applied by seeded
/// sampling; interactions come out in (query id, polarity, passage id) order,
/// positives first.
AugmentedDataset augment_offline(const Collection& collection, const EmbeddingProvider& provider,
                                 const QuestionGenerator& generator, std::size_t facet_k, AugmentCaps caps,
                                 std::uint64_t seed, AugmentReport* report = nullptr, std::size_t jobs = 1);

struct OnlineInteraction {
    Interaction interaction;
    Ranking first_stage;  // the BM25 ranking the facet was drawn from
};

/// Online (test-time) interaction generation: BM25 retrieval, facet from the
/// top passage, question, answer from the simulator against a sampled intent.
OnlineInteraction augment_online(const Collection& collection, const InvertedIndex& index,
                                 const EmbeddingProvider& provider, const QuestionGenerator& generator,
                                 const UserSimulator& simulator, const Query& query, std::size_t depth,
                                 std::size_t facet_k, std::uint64_t seed, Bm25Params bm25 = {});

/// Query/passage scorer used for hard-negative denoising.
class PairScorer {
  public:
    virtual ~PairScorer() = default;
    virtual double score(const std::string& query_text, const std::string& passage_text) const = 0;
    virtual std::string name() const = 0;
};

/// Embedding-cosine proxy scorer.
class EmbedPairScorer: public PairScorer {
  public:
    explicit EmbedPairScorer(const EmbeddingProvider& provider): provider_(provider) {}
    double score(const std::string& query_text, const std::string& passage_text) const override;
    std::string name() const override { return "embed-cosine"; }

  private:
    const EmbeddingProvider& provider_;
};

/// Gateway /score verb over a `Query: q Document: d` prompt.
class RemotePairScorer: public PairScorer {
  public:
    explicit RemotePairScorer(std::shared_ptr<GatewayClient> gateway);
    double score(const std::string& query_text, const std::string& passage_text) const override;
    std::string name() const override { return "remote"; }

  private:
    std::shared_ptr<GatewayClient> gateway_;
};

struct DenoiseResult {
    Collection collection;
    std::size_t removed = 0;
    bool threshold_out_of_range = false;  // warning: no observed score near it
    double observed_min = 0.0;
    double observed_max = 0.0;
};

/// Removes negatives scoring >= threshold against their query. Positives are
/// never touched; no passages are added or removed from the collection.
DenoiseResult denoise_negatives(const Collection& collection, const PairScorer& scorer, double threshold);

struct DatasetStats {
    std::size_t query_count = 0;
    std::size_t passage_count = 0;
    double interactions_per_query_mean = 0.0;
    double mean_question_length = 0.0;  // whitespace tokens
    double positive_answer_fraction = 0.0;
    double negative_answer_fraction = 0.0;
};

DatasetStats compute_stats(const AugmentedDataset& dataset, const Collection& collection);

void write_interactions_jsonl(const std::string& path, const std::vector<Interaction>& interactions);
std::vector<Interaction> load_interactions_jsonl(const std::string& path);

/// Grid-searches theta in {0.1,...,0.9} for the value whose lexical answers
/// agree most often with the polarity-heuristic labels on an offline-built
/// slice; ties resolve to the smallest theta. Interactions without an intent
/// fall back to their facet's source passage.
double calibrate_theta(const AugmentedDataset& dataset, const Collection& collection);

struct LabeledPair {
    std::string query_text;
    std::string passage_text;
    bool true_negative;  // hand label: genuinely irrelevant
};

/// Sweeps candidate thresholds (the observed scores) and returns the one
/// maximizing precision of retained negatives; ties resolve to the threshold
/// retaining more pairs.
double calibrate_denoise_threshold(const std::vector<LabeledPair>& labeled, const PairScorer& scorer);

}  // namespace miir

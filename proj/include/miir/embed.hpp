#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "miir/analyzer.hpp"
#include "miir/corpus.hpp"

namespace miir {

class GatewayClient;

/// Unit-norm real vector. Providers are responsible for normalizing.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    double norm() const;
};

/// Dot product of unit vectors, clamped to [-1, 1].
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Contract: deterministic per instance, one unit-norm vector per input text,
/// order preserving. Texts whose tokens are all filtered are an error.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const = 0;

    EmbeddingVector embed_one(const std::string& text) const;
};

/// Collection-level inverse document frequencies for embedding weights.
class IdfTable {
  public:
    IdfTable() = default;  // uniform weights, for collection-free usage
    static IdfTable from_passages(const std::map<std::string, Passage>& passages, const Analyzer& analyzer);

    double idf(const std::string& term) const;
    std::uint64_t content_hash() const { return hash_; }

  private:
    std::map<std::string, std::size_t> df_;
    std::size_t num_docs_ = 0;
    std::uint64_t hash_ = 0;
};

struct LocalProviderConfig {
    std::size_t dim = 512;
    std::uint64_t seed = 0x6d696972;  // hashing seed; part of the config hash
    std::size_t min_ngram = 3;
    std::size_t max_ngram = 5;
};

/// Model-free embedding provider. A token's vector is the L2-normalized
/// feature-hashed (signed) sum of its character n-grams plus the whole token;
/// a text's vector is the IDF-weighted sum of its token vectors, normalized.
/// Token contributions accumulate per unique token in sorted order, so the
/// result is exactly invariant under token permutation.
class HashedEmbeddingProvider: public EmbeddingProvider {
  public:
    HashedEmbeddingProvider(LocalProviderConfig config, IdfTable idf);

    std::string name() const override { return "local-hash"; }
    std::size_t dim() const override { return config_.dim; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override;

    EmbeddingVector token_vector(const std::string& token) const;
    std::uint64_t config_hash() const;

  private:
    LocalProviderConfig config_;
    IdfTable idf_;
    Analyzer analyzer_;  // min length 2, stopwords kept: IDF already downweights them
};

/// Client-side provider for the model gateway `embed` verb. Batches requests
/// (32 texts each), re-normalizes defensively, and propagates gateway errors.
class RemoteEmbeddingProvider: public EmbeddingProvider {
  public:
    RemoteEmbeddingProvider(std::shared_ptr<GatewayClient> gateway, std::size_t dim);

    std::string name() const override { return "remote"; }
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override;

    static constexpr std::size_t kBatchSize = 32;

  private:
    std::shared_ptr<GatewayClient> gateway_;
    std::size_t dim_;
};

}  // namespace miir

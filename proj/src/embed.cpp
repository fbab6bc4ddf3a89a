#include "miir/embed.hpp"

#include <algorithm>
#include <cmath>

#include "miir/common.hpp"
#include "miir/gateway.hpp"

namespace miir {

double EmbeddingVector::norm() const {
    double s = 0.0;
    for (double v: values) s += v * v;
    return std::sqrt(s);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw InputError("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()) + ")");
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
    return std::clamp(dot, -1.0, 1.0);
}

EmbeddingVector EmbeddingProvider::embed_one(const std::string& text) const {
    return embed({text}).front();
}

IdfTable IdfTable::from_passages(const std::map<std::string, Passage>& passages, const Analyzer& analyzer) {
    IdfTable table;
    table.num_docs_ = passages.size();
    for (const auto& [pid, passage]: passages) {
        auto tokens = analyzer.tokenize(passage.text);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& t: tokens) ++table.df_[std::move(t)];
    }
    std::uint64_t h = fnv1a_u64(table.num_docs_);
    for (const auto& [term, df]: table.df_) h = fnv1a_u64(df, fnv1a(term, h));
    table.hash_ = h;
    return table;
}

double IdfTable::idf(const std::string& term) const {
    if (num_docs_ == 0) return 1.0;
    auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log(1.0 + (static_cast<double>(num_docs_) - df + 0.5) / (df + 0.5));
}

HashedEmbeddingProvider::HashedEmbeddingProvider(LocalProviderConfig config, IdfTable idf)
    : config_(config), idf_(std::move(idf)), analyzer_(AnalyzerOptions{2, false}) {
    if (config_.dim == 0) throw ConfigError("embedding dim must be positive");
    if (config_.min_ngram < 1 || config_.max_ngram < config_.min_ngram) {
        throw ConfigError("invalid n-gram range");
    }
}

std::uint64_t HashedEmbeddingProvider::config_hash() const {
    std::uint64_t h = fnv1a("local-hash");
    h = fnv1a_u64(config_.dim, h);
    h = fnv1a_u64(config_.seed, h);
    h = fnv1a_u64(config_.min_ngram, h);
    h = fnv1a_u64(config_.max_ngram, h);
    h = fnv1a_u64(idf_.content_hash(), h);
    return h;
}

EmbeddingVector HashedEmbeddingProvider::token_vector(const std::string& token) const {
    EmbeddingVector vec;
    vec.values.assign(config_.dim, 0.0);

    auto add_feature = [&](std::string_view gram) {
        const std::uint64_t h1 = fnv1a(gram, fnv1a_u64(config_.seed));
        const std::uint64_t h2 = fnv1a(gram, fnv1a_u64(config_.seed ^ 0x9e3779b97f4a7c15ULL));
        const double sign = (h2 & 1U) != 0 ? 1.0 : -1.0;
        vec.values[h1 % config_.dim] += sign;
    };

    for (std::size_t n = config_.min_ngram; n <= config_.max_ngram; ++n) {
        if (token.size() < n) break;
        for (std::size_t i = 0; i + n <= token.size(); ++i) add_feature(std::string_view(token).substr(i, n));
    }
    add_feature(token);

    const double norm = vec.norm();
    // The whole-token feature guarantees a non-zero vector for any token.
    for (double& v: vec.values) v /= norm;
    return vec;
}

std::vector<EmbeddingVector> HashedEmbeddingProvider::embed(const std::vector<std::string>& texts) const {
    if (texts.empty()) throw InputError("embed: empty text list");

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text: texts) {
        auto tokens = analyzer_.tokenize(text);
        std::map<std::string, std::size_t> counts;
        for (auto& t: tokens) ++counts[std::move(t)];
        if (counts.empty()) throw InputError("embed: text has no usable tokens: \"" + text + "\"");

        EmbeddingVector vec;
        vec.values.assign(config_.dim, 0.0);
        for (const auto& [token, count]: counts) {
            const double weight = static_cast<double>(count) * idf_.idf(token);
            const auto tv = token_vector(token);
            for (std::size_t i = 0; i < config_.dim; ++i) vec.values[i] += weight * tv.values[i];
        }
        const double norm = vec.norm();
        if (norm == 0.0 || !std::isfinite(norm)) {
            throw ProviderError("embed: degenerate zero vector for text: \"" + text + "\"");
        }
        for (double& v: vec.values) v /= norm;
        out.push_back(std::move(vec));
    }
    return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::shared_ptr<GatewayClient> gateway, std::size_t dim)
    : gateway_(std::move(gateway)), dim_(dim) {
    if (!gateway_) throw ConfigError("remote embedding provider needs a gateway client");
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed(const std::vector<std::string>& texts) const {
    if (texts.empty()) throw InputError("embed: empty text list");
    for (const auto& t: texts) {
        if (t.find_first_not_of(" \t\r\n") == std::string::npos) throw InputError("embed: empty text");
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += kBatchSize) {
        const std::size_t end = std::min(texts.size(), begin + kBatchSize);
        std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                       texts.begin() + static_cast<std::ptrdiff_t>(end));
        auto vectors = gateway_->embed(batch);
        if (vectors.size() != batch.size()) {
            throw ProtocolError("gateway returned " + std::to_string(vectors.size()) + " vectors for " +
                                std::to_string(batch.size()) + " texts");
        }
        for (auto& values: vectors) {
            if (values.size() != dim_) {
                throw ProtocolError("gateway returned vector of dim " + std::to_string(values.size()) +
                                    ", expected " + std::to_string(dim_));
            }
            EmbeddingVector vec{std::move(values)};
            const double norm = vec.norm();
            if (!std::isfinite(norm) || norm == 0.0) throw ProtocolError("gateway returned a degenerate vector");
            for (double& v: vec.values) v /= norm;
            out.push_back(std::move(vec));
        }
    }
    return out;
}

}  // namespace miir

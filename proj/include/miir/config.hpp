#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "miir/analyzer.hpp"
#include "miir/gateway.hpp"
#include "miir/index.hpp"

namespace miir {

/// Full toolkit configuration. Loadable from a dotted key=value file, every
/// key overridable on the command line; precedence flags > file > defaults.
/// The canonical serialization (sorted keys) is hashed into output manifests.
struct Config {
    struct Paths {
        std::string passages;
        std::string queries;
        std::string qrels;
        std::string qrels_format = "trec";  // trec | hardneg_jsonl
        std::string index_path;
        std::string output_dir = "out";
    } paths;

    AnalyzerOptions analyzer;  // min_token_len=2, remove_stopwords=true

    Bm25Params bm25;
    std::size_t depth = 100;

    Rm3Params rm3;
    bool rm3_enabled = false;

    std::size_t facet_k = 5;

    struct Embed {
        std::string provider = "local";  // local | remote
        std::size_t dim = 512;
        std::uint64_t seed = 0x6d696972;
    } embed;

    GatewayConfig gateway;

    struct Generator {
        std::string kind = "template";  // template | remote
        bool fallback_to_template = true;
    } generator;

    struct Answerer {
        std::string kind = "lexical";  // lexical | remote
        double theta = 0.6;
    } answerer;

    struct Scorer {
        std::string kind = "local";  // local | remote
        double alpha = 1.0;
        double beta = 2.0;
    } scorer;

    struct Session {
        int t_max = 5;
        bool fixed_facet_list = false;
    } session;

    struct Eval {
        double rbo_p = 0.9;
        std::vector<std::size_t> mrr_cutoffs = {10};
        std::vector<std::size_t> ndcg_cutoffs = {1, 3, 10};
    } eval;

    std::uint64_t seed = 42;
    bool lenient_qrels = false;
    std::size_t jobs = 1;
    std::optional<std::size_t> max_pos;  // offline caps; unlimited by default
    std::optional<std::size_t> max_neg;

    void validate() const;
    std::string canonical_string() const;
    std::uint64_t hash() const;

    /// Applies one dotted key. Unknown keys and unparsable values throw.
    void set(const std::string& key, const std::string& value);

    static Config from_file(const std::string& path);
    static Config defaults() { return {}; }
};

}  // namespace miir

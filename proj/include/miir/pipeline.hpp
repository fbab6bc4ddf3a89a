#pragma once

#include <memory>
#include <string>
#include <vector>

#include "miir/augment.hpp"
#include "miir/config.hpp"
#include "miir/corpus.hpp"
#include "miir/embed.hpp"
#include "miir/eval.hpp"
#include "miir/index.hpp"
#include "miir/interact.hpp"
#include "miir/rerank.hpp"

namespace miir {

/// Environment variable overriding gateway.url.
inline constexpr const char* kGatewayEnvVar = "MIIR_GATEWAY";

Collection load_collection(const Config& config);
std::shared_ptr<GatewayClient> make_gateway(const Config& config);
std::unique_ptr<EmbeddingProvider> make_provider(const Config& config, const Collection& collection,
                                                 std::shared_ptr<GatewayClient> gateway = nullptr);
std::unique_ptr<QuestionGenerator> make_generator(const Config& config,
                                                  std::shared_ptr<GatewayClient> gateway = nullptr);
std::unique_ptr<UserSimulator> make_simulator(const Config& config,
                                              std::shared_ptr<GatewayClient> gateway = nullptr);
ScorerFactory make_scorer_factory(const Config& config, std::shared_ptr<GatewayClient> gateway = nullptr);

/// Builds and persists the inverted index. Returns the artifact path.
std::string cmd_index(const Config& config);

/// First-stage retrieval for every query; BM25, or BM25+RM3 when enabled.
/// Returns the run file path.
std::string cmd_search(const Config& config);

struct OfflineOutputs {
    std::string interactions_path;
    std::string stats_path;
    std::string manifest_path;
    DatasetStats stats;
    AugmentReport report;
};
OfflineOutputs cmd_augment_offline(const Config& config);

struct OnlineOutputs {
    std::string interactions_path;
    std::string first_stage_run_path;
    std::string manifest_path;
    std::size_t generated = 0;
    std::size_t failed = 0;
};
OnlineOutputs cmd_augment_online(const Config& config);

/// Second-stage rerank of an existing run file using stored interactions.
/// Queries without an interaction pass through unchanged. Returns the
/// reranked run path.
std::string cmd_rerank(const Config& config, const std::string& run_path,
                       const std::string& interactions_path);

struct SessionOutputs {
    std::string first_stage_run_path;
    std::vector<std::string> turn_run_paths;  // t = 1..t_max
    std::string trace_path;
    std::string manifest_path;
    std::size_t sessions = 0;
    std::size_t failed = 0;
};
SessionOutputs cmd_session(const Config& config);

struct EvalOutputs {
    std::string report_path;
    std::string rbo_series_path;   // written when >= 2 run files are given
    std::string turn_stats_path;   // written when a session trace is given
    std::vector<MetricReport> reports;  // one per run file, input order
};
EvalOutputs cmd_eval(const Config& config, const std::vector<std::string>& run_paths,
                     const std::string& qrels_path, const std::string& trace_path = "");

/// Statistics of a stored interactions file. Returns the stats path.
std::string cmd_stats(const Config& config, const std::string& interactions_path);

}  // namespace miir

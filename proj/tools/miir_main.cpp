#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "miir/common.hpp"
#include "miir/pipeline.hpp"

namespace {

int exit_code(miir::ErrorKind kind) {
    switch (kind) {
        case miir::ErrorKind::parse: return 2;
        case miir::ErrorKind::integrity: return 3;
        case miir::ErrorKind::config: return 4;
        case miir::ErrorKind::input: return 5;
        case miir::ErrorKind::provider: return 6;
        case miir::ErrorKind::gateway: return 7;
        case miir::ErrorKind::protocol: return 8;
        case miir::ErrorKind::domain: return 9;
        case miir::ErrorKind::io: return 10;
    }
    return 1;
}

struct CommonArgs {
    std::string config_file;
    std::vector<std::string> sets;  // key=value overrides
    std::string passages, queries, qrels, qrels_format, index_path, output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    bool lenient = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_file, "configuration file (key = value lines)");
    cmd->add_option("--set", args.sets, "override a config key, e.g. --set bm25.k1=1.2")
        ->take_all();
    cmd->add_option("--passages", args.passages, "passages TSV (pid<TAB>text)");
    cmd->add_option("--queries", args.queries, "queries TSV (qid<TAB>text)");
    cmd->add_option("--qrels", args.qrels, "qrels file");
    cmd->add_option("--qrels-format", args.qrels_format, "trec | hardneg_jsonl");
    cmd->add_option("--index", args.index_path, "index artifact path");
    cmd->add_option("--out", args.output_dir, "output directory");
    cmd->add_option("--seed", args.seed, "global RNG seed");
    cmd->add_option("--jobs", args.jobs, "parallel workers per command");
    cmd->add_flag("--lenient", args.lenient, "drop qrels rows referencing unknown ids instead of failing");
}

miir::Config build_config(const CommonArgs& args) {
    miir::Config cfg = args.config_file.empty() ? miir::Config::defaults()
                                                : miir::Config::from_file(args.config_file);
    for (const auto& kv: args.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw miir::ConfigError("--set expects key=value, got " + kv);
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!args.passages.empty()) cfg.paths.passages = args.passages;
    if (!args.queries.empty()) cfg.paths.queries = args.queries;
    if (!args.qrels.empty()) cfg.paths.qrels = args.qrels;
    if (!args.qrels_format.empty()) cfg.paths.qrels_format = args.qrels_format;
    if (!args.index_path.empty()) cfg.paths.index_path = args.index_path;
    if (!args.output_dir.empty()) cfg.paths.output_dir = args.output_dir;
    if (args.seed) cfg.seed = *args.seed;
    if (args.jobs) cfg.jobs = *args.jobs;
    if (args.lenient) cfg.lenient_qrels = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"miir: mixed-initiative interaction augmentation and reranking toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    bool rm3 = false;
    std::string run_path, interactions_path, trace_path;
    std::vector<std::string> run_paths;

    auto* index_cmd = app.add_subcommand("index", "build the inverted index artifact");
    add_common(index_cmd, args);

    auto* search_cmd = app.add_subcommand("search", "first-stage retrieval to a TREC run file");
    add_common(search_cmd, args);
    search_cmd->add_flag("--rm3", rm3, "expand queries with RM3 before retrieval");

    auto* offline_cmd = app.add_subcommand("augment-offline", "build offline interactions from qrels");
    add_common(offline_cmd, args);

    auto* online_cmd = app.add_subcommand("augment-online", "build online interactions from retrieval");
    add_common(online_cmd, args);

    auto* rerank_cmd = app.add_subcommand("rerank", "rescore a run file with stored interactions");
    add_common(rerank_cmd, args);
    rerank_cmd->add_option("--run", run_path, "TREC run file to rerank")->required();
    rerank_cmd->add_option("--interactions", interactions_path, "interactions JSONL")->required();

    auto* session_cmd = app.add_subcommand("session", "multi-turn sessions over all queries");
    add_common(session_cmd, args);

    auto* eval_cmd = app.add_subcommand("eval", "score run files against qrels");
    add_common(eval_cmd, args);
    eval_cmd->add_option("--run", run_paths, "run files, in turn order for the RBO series")
        ->required()
        ->take_all();
    eval_cmd->add_option("--trace", trace_path, "session trace JSONL for per-turn statistics");

    auto* stats_cmd = app.add_subcommand("stats", "statistics of an interactions file");
    add_common(stats_cmd, args);
    stats_cmd->add_option("--interactions", interactions_path, "interactions JSONL")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = [&] {
            auto c = build_config(args);
            if (search_cmd->parsed() && rm3) c.rm3_enabled = true;
            return c;
        }();

        if (index_cmd->parsed()) {
            const auto artifact = miir::cmd_index(cfg);
            std::cout << "index: " << artifact << '\n';
        } else if (search_cmd->parsed()) {
            const auto run = miir::cmd_search(cfg);
            std::cout << "run: " << run << '\n';
        } else if (offline_cmd->parsed()) {
            const auto out = miir::cmd_augment_offline(cfg);
            std::cout << "interactions: " << out.interactions_path << '\n'
                      << "stats: " << out.stats_path << '\n';
        } else if (online_cmd->parsed()) {
            const auto out = miir::cmd_augment_online(cfg);
            std::cout << "interactions: " << out.interactions_path << " (" << out.generated << " ok, "
                      << out.failed << " failed)\n"
                      << "first-stage run: " << out.first_stage_run_path << '\n';
        } else if (rerank_cmd->parsed()) {
            const auto reranked = miir::cmd_rerank(cfg, run_path, interactions_path);
            std::cout << "reranked run: " << reranked << '\n';
        } else if (session_cmd->parsed()) {
            const auto out = miir::cmd_session(cfg);
            std::cout << "sessions: " << out.sessions << " (" << out.failed << " failed)\n"
                      << "trace: " << out.trace_path << '\n';
            for (const auto& p: out.turn_run_paths) std::cout << "run: " << p << '\n';
        } else if (eval_cmd->parsed()) {
            const auto out = miir::cmd_eval(cfg, run_paths, cfg.paths.qrels, trace_path);
            std::cout << "report: " << out.report_path << '\n';
            for (std::size_t i = 0; i < out.reports.size(); ++i) {
                std::cout << "== " << run_paths[i] << '\n' << out.reports[i].to_table();
            }
        } else if (stats_cmd->parsed()) {
            const auto stats_path = miir::cmd_stats(cfg, interactions_path);
            std::cout << "stats: " << stats_path << '\n';
        }
    } catch (const miir::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

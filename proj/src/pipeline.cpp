#include "miir/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "miir/common.hpp"
#include "miir/parallel.hpp"

namespace miir {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex_hash(std::uint64_t h) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

std::string output_path(const Config& config, const std::string& name) {
    fs::create_directories(config.paths.output_dir);
    return (fs::path(config.paths.output_dir) / name).string();
}

void write_manifest(const Config& config, const std::string& command, json extra) {
    json manifest = {
        {"tool", "miir"},
        {"version", kVersion},
        {"command", command},
        {"config_hash", hex_hash(config.hash())},
        {"seed", config.seed},
    };
    manifest.update(extra);
    const auto path = output_path(config, command + "_manifest.json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << manifest.dump(2) << '\n';
}

std::string index_artifact_path(const Config& config) {
    if (!config.paths.index_path.empty()) return config.paths.index_path;
    return output_path(config, "index.miir");
}

json stats_to_json(const DatasetStats& stats) {
    return {
        {"query_count", stats.query_count},
        {"passage_count", stats.passage_count},
        {"interactions_per_query_mean", stats.interactions_per_query_mean},
        {"mean_question_length", stats.mean_question_length},
        {"positive_answer_fraction", stats.positive_answer_fraction},
        {"negative_answer_fraction", stats.negative_answer_fraction},
    };
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

Collection load_collection(const Config& config) {
    if (config.paths.passages.empty()) throw ConfigError("paths.passages is required");
    Collection collection;
    collection.passages = load_passages(config.paths.passages);
    if (!config.paths.queries.empty()) collection.queries = load_queries(config.paths.queries);
    if (!config.paths.qrels.empty()) {
        const auto format = config.paths.qrels_format == "hardneg_jsonl" ? QrelsFormat::hardneg_jsonl
                                                                         : QrelsFormat::trec_qrels;
        std::size_t dropped = 0;
        collection.qrels = load_qrels(config.paths.qrels, format, collection, config.lenient_qrels, &dropped);
        if (dropped > 0) {
            std::cerr << "warning: dropped " << dropped << " qrels rows referencing unknown ids\n";
        }
    }
    return collection;
}

std::shared_ptr<GatewayClient> make_gateway(const Config& config) {
    GatewayConfig gc = config.gateway;
    if (const char* env = std::getenv(kGatewayEnvVar); env != nullptr && *env != '\0') {
        gc.base_url = env;
    }
    return std::make_shared<GatewayClient>(gc);
}

std::unique_ptr<EmbeddingProvider> make_provider(const Config& config, const Collection& collection,
                                                 std::shared_ptr<GatewayClient> gateway) {
    if (config.embed.provider == "remote") {
        if (!gateway) gateway = make_gateway(config);
        return std::make_unique<RemoteEmbeddingProvider>(std::move(gateway), config.embed.dim);
    }
    auto idf = IdfTable::from_passages(collection.passages, Analyzer(AnalyzerOptions{2, false}));
    LocalProviderConfig lpc;
    lpc.dim = config.embed.dim;
    lpc.seed = config.embed.seed;
    return std::make_unique<HashedEmbeddingProvider>(lpc, std::move(idf));
}

std::unique_ptr<QuestionGenerator> make_generator(const Config& config,
                                                  std::shared_ptr<GatewayClient> gateway) {
    if (config.generator.kind == "remote") {
        if (!gateway) gateway = make_gateway(config);
        return std::make_unique<RemoteQuestionGenerator>(std::move(gateway),
                                                         config.generator.fallback_to_template);
    }
    return std::make_unique<TemplateQuestionGenerator>();
}

std::unique_ptr<UserSimulator> make_simulator(const Config& config, std::shared_ptr<GatewayClient> gateway) {
    if (config.answerer.kind == "remote") {
        if (!gateway) gateway = make_gateway(config);
        return std::make_unique<RemoteUserSimulator>(std::move(gateway));
    }
    return std::make_unique<LexicalSimUserSimulator>(config.answerer.theta);
}

ScorerFactory make_scorer_factory(const Config& config, std::shared_ptr<GatewayClient> gateway) {
    if (config.scorer.kind == "remote") {
        if (!gateway) gateway = make_gateway(config);
        return [gateway](const Ranking&) -> std::unique_ptr<PassageScorer> {
            return std::make_unique<RemoteInteractionScorer>(gateway);
        };
    }
    LocalScorerParams params{config.scorer.alpha, config.scorer.beta};
    return [params](const Ranking& cohort) -> std::unique_ptr<PassageScorer> {
        return std::make_unique<LocalInteractionScorer>(cohort, params);
    };
}

std::string cmd_index(const Config& config) {
    config.validate();
    const auto passages = load_passages(config.paths.passages);
    const auto index = InvertedIndex::build(passages, Analyzer(config.analyzer));
    const auto path = index_artifact_path(config);
    index.save(path);
    write_manifest(config, "index",
                   {{"artifact", path},
                    {"passages", index.num_passages()},
                    {"avg_length", index.avg_length()}});
    return path;
}

std::string cmd_search(const Config& config) {
    config.validate();
    if (config.paths.queries.empty()) throw ConfigError("paths.queries is required for search");
    const auto queries = load_queries(config.paths.queries);
    const auto index = InvertedIndex::load(index_artifact_path(config));

    const std::string tag = config.rm3_enabled ? "rm3" : "bm25";
    std::vector<Ranking> rankings;
    rankings.reserve(queries.size());
    for (const auto& [qid, query]: queries) {
        Ranking r;
        if (config.rm3_enabled) {
            const auto expanded = index.rm3_expand(query.text, config.rm3, config.bm25);
            r = index.weighted_search(expanded, config.depth, config.bm25);
        } else {
            r = index.bm25_search(query.text, config.depth, config.bm25);
        }
        r.query_id = qid;
        rankings.push_back(std::move(r));
    }
    const auto path = output_path(config, tag + ".run");
    write_trec_run(path, rankings);
    write_manifest(config, "search", {{"run", path}, {"tag", tag}, {"queries", queries.size()}});
    return path;
}

OfflineOutputs cmd_augment_offline(const Config& config) {
    config.validate();
    const auto collection = load_collection(config);
    const auto provider = make_provider(config, collection);
    const auto generator = make_generator(config);

    OfflineOutputs outputs;
    auto dataset = augment_offline(collection, *provider, *generator, config.facet_k,
                                   AugmentCaps{config.max_pos, config.max_neg}, config.seed,
                                   &outputs.report, config.jobs);
    dataset.config_hash = config.hash();

    outputs.interactions_path = output_path(config, "interactions.jsonl");
    write_interactions_jsonl(outputs.interactions_path, dataset.interactions);

    outputs.stats = compute_stats(dataset, collection);
    outputs.stats_path = output_path(config, "stats.json");
    write_json_file(outputs.stats_path, stats_to_json(outputs.stats));

    write_manifest(config, "augment_offline",
                   {{"interactions", dataset.interactions.size()},
                    {"facet_failures", outputs.report.facet_failures},
                    {"generation_failures", outputs.report.generation_failures},
                    {"empty_queries", outputs.report.empty_queries}});
    outputs.manifest_path = output_path(config, "augment_offline_manifest.json");
    return outputs;
}

namespace {

std::shared_ptr<GatewayClient> shared_gateway_if_needed(const Config& config) {
    const bool needed = config.embed.provider == "remote" || config.generator.kind == "remote" ||
                        config.answerer.kind == "remote" || config.scorer.kind == "remote";
    return needed ? make_gateway(config) : nullptr;
}

}  // namespace

OnlineOutputs cmd_augment_online(const Config& config) {
    config.validate();
    const auto collection = load_collection(config);
    auto gateway = shared_gateway_if_needed(config);
    const auto provider = make_provider(config, collection, gateway);
    const auto generator = make_generator(config, gateway);
    const auto simulator = make_simulator(config, gateway);
    const auto index = InvertedIndex::load(index_artifact_path(config));

    std::vector<const Query*> queries;
    queries.reserve(collection.queries.size());
    for (const auto& [qid, query]: collection.queries) queries.push_back(&query);

    struct Slot {
        std::optional<OnlineInteraction> result;
        std::string error;
    };
    std::vector<Slot> slots(queries.size());
    parallel_for(queries.size(), config.jobs, [&](std::size_t i) {
        try {
            slots[i].result = augment_online(collection, index, *provider, *generator, *simulator,
                                             *queries[i], config.depth, config.facet_k, config.seed,
                                             config.bm25);
        } catch (const Error& e) {
            slots[i].error = e.what();
        }
    });

    OnlineOutputs outputs;
    std::vector<Interaction> interactions;
    std::vector<Ranking> rankings;
    json failures = json::array();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].result) {
            interactions.push_back(std::move(slots[i].result->interaction));
            rankings.push_back(std::move(slots[i].result->first_stage));
        } else {
            ++outputs.failed;
            failures.push_back({{"qid", queries[i]->id}, {"error", slots[i].error}});
        }
    }
    outputs.generated = interactions.size();

    outputs.interactions_path = output_path(config, "online_interactions.jsonl");
    write_interactions_jsonl(outputs.interactions_path, interactions);
    outputs.first_stage_run_path = output_path(config, "online_first_stage.run");
    write_trec_run(outputs.first_stage_run_path, rankings);
    write_manifest(config, "augment_online",
                   {{"interactions", outputs.generated}, {"failures", failures}});
    outputs.manifest_path = output_path(config, "augment_online_manifest.json");
    return outputs;
}

std::string cmd_rerank(const Config& config, const std::string& run_path,
                       const std::string& interactions_path) {
    config.validate();
    const auto collection = load_collection(config);
    const auto run = read_trec_run(run_path);
    const auto interactions = load_interactions_jsonl(interactions_path);
    const auto factory = make_scorer_factory(config);

    std::map<std::string, const Interaction*> by_query;
    for (const auto& x: interactions) by_query.emplace(x.query_id, &x);

    std::vector<Ranking> rankings;
    std::size_t passthrough = 0;
    for (const auto& [qid, ranking]: run) {
        auto it = by_query.find(qid);
        if (it == by_query.end()) {
            rankings.push_back(ranking);
            ++passthrough;
            continue;
        }
        auto query_it = collection.queries.find(qid);
        if (query_it == collection.queries.end()) throw IntegrityError("run references unknown query " + qid);
        const auto scorer = factory(ranking);
        rankings.push_back(
            rerank_once(ranking, *scorer, query_it->second, collection.passages, *it->second, 1));
    }

    const auto path = output_path(config, "reranked.run");
    write_trec_run(path, rankings);
    write_manifest(config, "rerank",
                   {{"run", path}, {"queries", run.size()}, {"passthrough_no_interaction", passthrough}});
    return path;
}

SessionOutputs cmd_session(const Config& config) {
    config.validate();
    const auto collection = load_collection(config);
    auto gateway = shared_gateway_if_needed(config);
    const auto provider = make_provider(config, collection, gateway);
    const auto generator = make_generator(config, gateway);
    const auto simulator = make_simulator(config, gateway);
    const auto factory = make_scorer_factory(config, gateway);
    const auto index = InvertedIndex::load(index_artifact_path(config));

    SessionOptions options;
    options.t_max = config.session.t_max;
    options.depth = config.depth;
    options.facet_k = config.facet_k;
    options.bm25 = config.bm25;
    options.fixed_facet_list = config.session.fixed_facet_list;

    std::vector<const Query*> queries;
    queries.reserve(collection.queries.size());
    for (const auto& [qid, query]: collection.queries) queries.push_back(&query);

    struct Slot {
        std::optional<Session> session;
        std::string error;
    };
    std::vector<Slot> slots(queries.size());
    parallel_for(queries.size(), config.jobs, [&](std::size_t i) {
        try {
            slots[i].session = run_session(collection, index, *provider, *generator, *simulator, factory,
                                           *queries[i], options, config.seed);
        } catch (const Error& e) {
            slots[i].error = e.what();
        }
    });

    SessionOutputs outputs;
    std::vector<Ranking> first_stage;
    std::vector<std::vector<Ranking>> per_turn(static_cast<std::size_t>(options.t_max));
    json failures = json::array();

    std::ofstream trace(output_path(config, "session_trace.jsonl"), std::ios::binary);
    if (!trace) throw IoError("cannot write session trace");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].session) {
            ++outputs.failed;
            failures.push_back({{"qid", queries[i]->id}, {"error", slots[i].error}});
            continue;
        }
        auto& session = *slots[i].session;
        ++outputs.sessions;
        first_stage.push_back(session.initial);

        json initial_record = {{"qid", session.query_id},
                               {"turn", 0},
                               {"entropy", session.initial_entropy}};
        if (session.initial_reciprocal_rank) initial_record["reciprocal_rank"] = *session.initial_reciprocal_rank;
        trace << initial_record.dump() << '\n';

        for (int t = 1; t <= options.t_max; ++t) {
            const auto idx = static_cast<std::size_t>(t - 1);
            if (idx < session.turns.size()) {
                const auto& turn = session.turns[idx];
                per_turn[idx].push_back(turn.ranking);
                json record = {{"qid", session.query_id},
                               {"turn", t},
                               {"interaction", turn.interaction.to_json()},
                               {"entropy", turn.entropy}};
                if (turn.reciprocal_rank) record["reciprocal_rank"] = *turn.reciprocal_rank;
                trace << record.dump() << '\n';
            } else {
                // Session exhausted its facet sources: later turn files carry
                // the last available ranking so every file covers all queries.
                Ranking carry = session.turns.empty() ? session.initial : session.turns.back().ranking;
                carry.tag = "rerank:t=" + std::to_string(t);
                per_turn[idx].push_back(std::move(carry));
            }
        }
    }
    outputs.trace_path = output_path(config, "session_trace.jsonl");

    outputs.first_stage_run_path = output_path(config, "first_stage.run");
    write_trec_run(outputs.first_stage_run_path, first_stage);
    for (int t = 1; t <= options.t_max; ++t) {
        const auto path = output_path(config, "session_t" + std::to_string(t) + ".run");
        write_trec_run(path, per_turn[static_cast<std::size_t>(t - 1)]);
        outputs.turn_run_paths.push_back(path);
    }
    write_manifest(config, "session",
                   {{"sessions", outputs.sessions}, {"t_max", options.t_max}, {"failures", failures}});
    outputs.manifest_path = output_path(config, "session_manifest.json");
    return outputs;
}

EvalOutputs cmd_eval(const Config& config, const std::vector<std::string>& run_paths,
                     const std::string& qrels_path, const std::string& trace_path) {
    config.validate();
    if (run_paths.empty()) throw InputError("eval needs at least one run file");

    // Evaluation needs only judgments; a collection is optional and, when
    // present, enables referential checking of the qrels.
    const auto& effective_qrels_path = qrels_path.empty() ? config.paths.qrels : qrels_path;
    const auto format = config.paths.qrels_format == "hardneg_jsonl" ? QrelsFormat::hardneg_jsonl
                                                                     : QrelsFormat::trec_qrels;
    Collection collection;
    if (!config.paths.passages.empty()) {
        Config load_cfg = config;
        load_cfg.paths.qrels = effective_qrels_path;
        collection = load_collection(load_cfg);
    } else if (!effective_qrels_path.empty()) {
        collection.qrels = load_qrels_standalone(effective_qrels_path, format);
    }

    EvalOutputs outputs;
    json report_json = json::object();
    json runs_json = json::object();

    std::vector<std::map<std::string, Ranking>> runs;
    runs.reserve(run_paths.size());
    for (const auto& path: run_paths) {
        auto run = read_trec_run(path);
        auto report = evaluate_run(run, collection.qrels, config.eval.mrr_cutoffs, config.eval.ndcg_cutoffs);
        report.rbo_p = config.eval.rbo_p;
        runs_json[fs::path(path).filename().string()] = report.to_json();
        outputs.reports.push_back(std::move(report));
        runs.push_back(std::move(run));
    }
    report_json["runs"] = runs_json;

    // Ranking similarity between consecutive run files (RBO ext, macro mean
    // over the queries both runs cover).
    if (runs.size() >= 2) {
        json series = json::array();
        std::ostringstream csv;
        csv << "pair,mean_rbo\n";
        for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& [qid, ranking]: runs[i]) {
                auto it = runs[i + 1].find(qid);
                if (it == runs[i + 1].end() || ranking.empty() || it->second.empty()) continue;
                sum += rbo(ranking, it->second, config.eval.rbo_p, RboMode::ext);
                ++n;
            }
            const double mean = n == 0 ? 0.0 : sum / static_cast<double>(n);
            const std::string pair_name = fs::path(run_paths[i]).filename().string() + "->" +
                                          fs::path(run_paths[i + 1]).filename().string();
            series.push_back({{"pair", pair_name}, {"mean_rbo", mean}, {"queries", n}});
            csv << pair_name << ',' << std::setprecision(17) << mean << '\n';
        }
        report_json["rbo_series"] = series;
        outputs.rbo_series_path = output_path(config, "rbo_series.csv");
        std::ofstream out(outputs.rbo_series_path, std::ios::binary);
        out << csv.str();
    }

    // Per-turn entropy / reciprocal-rank means from a session trace.
    if (!trace_path.empty()) {
        std::ifstream in(trace_path, std::ios::binary);
        if (!in) throw IoError("cannot open " + trace_path);
        std::map<int, std::pair<double, std::size_t>> entropy_acc;
        std::map<int, std::pair<double, std::size_t>> rr_acc;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            const auto record = json::parse(line);
            const int turn = record.at("turn").get<int>();
            if (record.contains("entropy")) {
                entropy_acc[turn].first += record.at("entropy").get<double>();
                entropy_acc[turn].second += 1;
            }
            if (record.contains("reciprocal_rank")) {
                rr_acc[turn].first += record.at("reciprocal_rank").get<double>();
                rr_acc[turn].second += 1;
            }
        }
        json turns = json::array();
        std::ostringstream csv;
        csv << "turn,mean_entropy,mean_reciprocal_rank\n";
        for (const auto& [turn, acc]: entropy_acc) {
            const double mean_entropy = acc.first / static_cast<double>(acc.second);
            double mean_rr = 0.0;
            if (auto it = rr_acc.find(turn); it != rr_acc.end() && it->second.second > 0) {
                mean_rr = it->second.first / static_cast<double>(it->second.second);
            }
            turns.push_back({{"turn", turn}, {"mean_entropy", mean_entropy}, {"mean_reciprocal_rank", mean_rr}});
            csv << turn << ',' << std::setprecision(17) << mean_entropy << ',' << mean_rr << '\n';
        }
        report_json["turn_stats"] = turns;
        outputs.turn_stats_path = output_path(config, "turn_stats.csv");
        std::ofstream out(outputs.turn_stats_path, std::ios::binary);
        out << csv.str();
    }

    outputs.report_path = output_path(config, "metrics.json");
    write_json_file(outputs.report_path, report_json);
    write_manifest(config, "eval", {{"runs", run_paths}, {"report", outputs.report_path}});
    return outputs;
}

std::string cmd_stats(const Config& config, const std::string& interactions_path) {
    config.validate();
    const auto collection = load_collection(config);
    AugmentedDataset dataset;
    dataset.interactions = load_interactions_jsonl(interactions_path);
    const auto stats = compute_stats(dataset, collection);
    const auto path = output_path(config, "stats.json");
    write_json_file(path, stats_to_json(stats));
    write_manifest(config, "stats", {{"interactions", dataset.interactions.size()}});
    return path;
}

}  // namespace miir

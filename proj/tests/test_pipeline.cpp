#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "miir/common.hpp"
#include "miir/pipeline.hpp"
#include "support/planted.hpp"
#include "support/stub_gateway.hpp"
#include "support/temp_dir.hpp"

using namespace miir;
using miir::testing::TempDir;
using nlohmann::json;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_qrels_trec(const std::string& path, const Qrels& qrels) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& [qid, j]: qrels.by_query) {
        for (const auto& pid: j.positives) out << qid << " 0 " << pid << " 1\n";
        for (const auto& pid: j.negatives) out << qid << " 0 " << pid << " 0\n";
    }
}

/// Writes a planted corpus to disk and returns a config rooted in the dir.
Config planted_config(const TempDir& dir, std::size_t queries = 6, std::size_t distractors = 7) {
    auto planted = miir::testing::make_planted_corpus(queries, distractors, 19);
    write_passages(dir.file("passages.tsv"), planted.collection.passages);
    write_queries(dir.file("queries.tsv"), planted.collection.queries);
    write_qrels_trec(dir.file("qrels.txt"), planted.collection.qrels);

    Config cfg;
    cfg.paths.passages = dir.file("passages.tsv");
    cfg.paths.queries = dir.file("queries.tsv");
    cfg.paths.qrels = dir.file("qrels.txt");
    cfg.paths.output_dir = dir.file("out");
    cfg.depth = 50;
    return cfg;
}

json parse_file(const std::string& path) {
    return json::parse(read_file(path));
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config file parsing, overrides and precedence") {
    TempDir dir;
    write_file(dir.file("miir.conf"),
               "# comment\n"
               "bm25.k1 = 1.2\n"
               "facet.k = 7\n"
               "eval.ndcg_cutoffs = 1,5\n"
               "answerer.theta = 0.4\n");
    auto cfg = Config::from_file(dir.file("miir.conf"));
    CHECK(cfg.bm25.k1 == doctest::Approx(1.2));
    CHECK(cfg.facet_k == 7);
    CHECK(cfg.eval.ndcg_cutoffs == std::vector<std::size_t>{1, 5});
    CHECK(cfg.answerer.theta == doctest::Approx(0.4));
    CHECK(cfg.bm25.b == doctest::Approx(0.4));  // untouched default

    cfg.set("bm25.k1", "0.9");  // flag-style override wins over the file value
    CHECK(cfg.bm25.k1 == doctest::Approx(0.9));

    CHECK_THROWS_AS(cfg.set("unknown.key", "1"), ConfigError);
    CHECK_THROWS_AS(cfg.set("bm25.k1", "not-a-number"), ConfigError);
    CHECK_THROWS_AS(Config::from_file(dir.file("missing.conf")), IoError);

    write_file(dir.file("bad.conf"), "just a line without equals\n");
    CHECK_THROWS_AS(Config::from_file(dir.file("bad.conf")), ConfigError);
}

TEST_CASE("config validation rejects out-of-range values") {
    Config cfg;
    cfg.bm25.b = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = Config();
    cfg.eval.rbo_p = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = Config();
    cfg.answerer.kind = "psychic";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = Config();
    cfg.session.t_max = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(Config().validate());
}

TEST_CASE("defaults carry the documented settings") {
    const Config cfg;
    CHECK(cfg.bm25.k1 == doctest::Approx(0.9));
    CHECK(cfg.bm25.b == doctest::Approx(0.4));
    CHECK(cfg.depth == 100);
    CHECK(cfg.rm3.fb_docs == 10);
    CHECK(cfg.rm3.fb_terms == 10);
    CHECK(cfg.rm3.mix == doctest::Approx(0.5));
    CHECK(cfg.facet_k == 5);
    CHECK(cfg.embed.dim == 512);
    CHECK(cfg.answerer.theta == doctest::Approx(0.6));
    CHECK(cfg.scorer.alpha == doctest::Approx(1.0));
    CHECK(cfg.scorer.beta == doctest::Approx(2.0));
    CHECK(cfg.session.t_max == 5);
    CHECK(cfg.eval.rbo_p == doctest::Approx(0.9));
    CHECK(cfg.eval.mrr_cutoffs == std::vector<std::size_t>{10});
    CHECK(cfg.eval.ndcg_cutoffs == std::vector<std::size_t>{1, 3, 10});
    CHECK(cfg.gateway.nucleus_p == doctest::Approx(0.95));
    CHECK(cfg.gateway.retries == 3);
}

TEST_CASE("config hash is stable and sensitive") {
    Config a;
    Config b;
    CHECK(a.hash() == b.hash());
    b.seed = 43;
    CHECK(a.hash() != b.hash());
    Config c;
    c.scorer.beta = 2.5;
    CHECK(a.hash() != c.hash());
    CHECK(a.canonical_string() == Config().canonical_string());
}

TEST_CASE("index and search commands produce a parseable run") {
    TempDir dir;
    auto cfg = planted_config(dir);
    const auto artifact = cmd_index(cfg);
    CHECK(read_file(artifact).substr(0, 8) == "MIIRIDX1");

    const auto run_path = cmd_search(cfg);
    auto run = read_trec_run(run_path);
    CHECK(run.size() == 6);
    for (const auto& [qid, ranking]: run) {
        CHECK(ranking.tag == "bm25");
        CHECK_FALSE(ranking.empty());
        ranking.validate();
    }

    auto manifest = parse_file(dir.file("out/search_manifest.json"));
    CHECK(manifest.at("version") == kVersion);
    CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("rm3 search runs end to end") {
    TempDir dir;
    auto cfg = planted_config(dir);
    cmd_index(cfg);
    cfg.rm3_enabled = true;
    const auto run_path = cmd_search(cfg);
    auto run = read_trec_run(run_path);
    CHECK(run.size() == 6);
    CHECK(run.begin()->second.tag == "rm3");
}

TEST_CASE("offline augmentation writes interactions, stats and manifest") {
    TempDir dir;
    auto cfg = planted_config(dir);
    auto out = cmd_augment_offline(cfg);

    auto interactions = load_interactions_jsonl(out.interactions_path);
    CHECK(interactions.size() == 6 * 8);  // one per judged passage

    auto stats = parse_file(out.stats_path);
    const double pos = stats.at("positive_answer_fraction").get<double>();
    const double neg = stats.at("negative_answer_fraction").get<double>();
    CHECK(pos + neg == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pos == doctest::Approx(1.0 / 8.0));

    auto manifest = parse_file(out.manifest_path);
    CHECK(manifest.at("interactions") == interactions.size());
    CHECK(manifest.at("seed") == cfg.seed);
}

TEST_CASE("online augmentation emits one interaction and ranking per query") {
    TempDir dir;
    auto cfg = planted_config(dir);
    cmd_index(cfg);
    auto out = cmd_augment_online(cfg);
    CHECK(out.generated == 6);
    CHECK(out.failed == 0);
    auto interactions = load_interactions_jsonl(out.interactions_path);
    auto run = read_trec_run(out.first_stage_run_path);
    REQUIRE(interactions.size() == 6);
    for (const auto& x: interactions) {
        CHECK(x.facet.source_passage_id == run.at(x.query_id).items.front().pid);
    }
}

TEST_CASE("rerank command rescores an existing run") {
    TempDir dir;
    auto cfg = planted_config(dir);
    cmd_index(cfg);
    auto online = cmd_augment_online(cfg);
    const auto reranked_path = cmd_rerank(cfg, online.first_stage_run_path, online.interactions_path);
    auto before = read_trec_run(online.first_stage_run_path);
    auto after = read_trec_run(reranked_path);
    REQUIRE(after.size() == before.size());
    for (const auto& [qid, ranking]: after) {
        CHECK(ranking.size() == before.at(qid).size());
        CHECK(ranking.tag == "rerank:t=1");
    }
}

TEST_CASE("session command emits t_max run files, a first stage and a trace") {
    TempDir dir;
    auto cfg = planted_config(dir, 4, 6);
    cfg.session.t_max = 5;
    cmd_index(cfg);
    auto out = cmd_session(cfg);
    CHECK(out.sessions == 4);
    CHECK(out.failed == 0);
    REQUIRE(out.turn_run_paths.size() == 5);
    for (const auto& path: out.turn_run_paths) CHECK(read_trec_run(path).size() == 4);

    // trace: one turn-0 record plus one per executed turn and query
    std::ifstream trace(out.trace_path);
    std::size_t lines = 0;
    std::string line;
    std::size_t turn0 = 0;
    while (std::getline(trace, line)) {
        if (line.empty()) continue;
        ++lines;
        auto record = json::parse(line);
        if (record.at("turn") == 0) {
            ++turn0;
            CHECK(record.contains("entropy"));
        } else {
            CHECK(record.contains("interaction"));
        }
    }
    CHECK(turn0 == 4);
    CHECK(lines == 4 * 6);  // 4 queries x (turn 0 + 5 turns)
}

TEST_CASE("eval command reports metrics, rbo series and turn stats") {
    TempDir dir;
    auto cfg = planted_config(dir, 4, 6);
    cfg.session.t_max = 5;
    cmd_index(cfg);
    auto session_out = cmd_session(cfg);

    std::vector<std::string> run_paths = session_out.turn_run_paths;  // five files
    auto eval_out = cmd_eval(cfg, run_paths, cfg.paths.qrels, session_out.trace_path);
    REQUIRE(eval_out.reports.size() == 5);
    for (const auto& report: eval_out.reports) {
        CHECK(report.per_query.at("mrr@10").size() == 4);
        CHECK(report.macro.contains("ndcg@3"));
    }

    auto report_json = parse_file(eval_out.report_path);
    CHECK(report_json.at("runs").size() == 5);
    REQUIRE(report_json.contains("rbo_series"));
    CHECK(report_json.at("rbo_series").size() == 4);  // consecutive pairs of five files
    REQUIRE(report_json.contains("turn_stats"));
    CHECK(report_json.at("turn_stats").size() == 6);  // turns 0..5

    CHECK_FALSE(eval_out.rbo_series_path.empty());
    CHECK(read_file(eval_out.rbo_series_path).starts_with("pair,mean_rbo"));
    CHECK(read_file(eval_out.turn_stats_path).starts_with("turn,mean_entropy"));
}

TEST_CASE("eval smoke: bundled toy run gets per-query mrr") {
    TempDir dir;
    auto cfg = planted_config(dir);
    cmd_index(cfg);
    const auto run_path = cmd_search(cfg);
    auto out = cmd_eval(cfg, {run_path}, cfg.paths.qrels);
    REQUIRE(out.reports.size() == 1);
    CHECK(out.reports[0].per_query.at("mrr@10").size() == 6);
    CHECK(out.rbo_series_path.empty());  // single run: no series
}

TEST_CASE("eval works from run files and qrels alone") {
    TempDir dir;
    auto cfg = planted_config(dir);
    cmd_index(cfg);
    const auto run_path = cmd_search(cfg);

    Config bare;
    bare.paths.output_dir = dir.file("bare_out");
    auto out = cmd_eval(bare, {run_path}, cfg.paths.qrels);
    REQUIRE(out.reports.size() == 1);
    CHECK(out.reports[0].macro.at("mrr@10") > 0.0);
}

TEST_CASE("stats command round trips an interactions file") {
    TempDir dir;
    auto cfg = planted_config(dir);
    auto offline = cmd_augment_offline(cfg);
    const auto stats_path = cmd_stats(cfg, offline.interactions_path);
    auto stats = parse_file(stats_path);
    CHECK(stats.at("query_count") == 6);
    CHECK(stats.at("positive_answer_fraction").get<double>() +
              stats.at("negative_answer_fraction").get<double>() ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("make_provider wires the collection idf into the local provider") {
    TempDir dir;
    auto cfg = planted_config(dir);
    auto collection = load_collection(cfg);
    auto provider = make_provider(cfg, collection);
    CHECK(provider->name() == "local-hash");
    CHECK(provider->dim() == cfg.embed.dim);
    CHECK_NOTHROW(provider->embed_one("alpha0 beta0"));
}

TEST_CASE("remote generator and answerer run through the gateway env override") {
    miir::testing::StubGateway stub;
    stub.set_generate([](const nlohmann::json& req) {
        return std::make_pair(200, nlohmann::json{{"text", "remote question about " +
                                                               req.at("prompt").get<std::string>().substr(7, 4) +
                                                               "?"}});
    });
    stub.set_answer(miir::testing::StubGateway::fixed(200, {{"text", "yes"}}));

    TempDir dir;
    auto cfg = planted_config(dir, 3, 5);
    cfg.generator.kind = "remote";
    cfg.answerer.kind = "remote";
    cfg.gateway.base_url = "http://127.0.0.1:1";  // env var must win over this
    cfg.gateway.retries = 0;
    cfg.gateway.backoff_ms = 1;
    setenv(kGatewayEnvVar, stub.url().c_str(), 1);
    cmd_index(cfg);
    auto out = cmd_augment_online(cfg);
    unsetenv(kGatewayEnvVar);

    CHECK(out.generated == 3);
    CHECK(out.failed == 0);
    for (const auto& x: load_interactions_jsonl(out.interactions_path)) {
        CHECK(x.gen == GenTag::remote_gen);
        CHECK(x.ans_src == AnswerSource::remote);
        CHECK(x.answer == Answer::yes);
        CHECK(x.question.starts_with("remote question"));
    }
}

TEST_CASE("collection loading honors lenient qrels") {
    TempDir dir;
    auto cfg = planted_config(dir);
    // append a qrels row referencing a pruned passage
    std::ofstream app(cfg.paths.qrels, std::ios::app);
    app << "q0 0 ghost 0\n";
    app.close();
    CHECK_THROWS_AS(load_collection(cfg), IntegrityError);
    cfg.lenient_qrels = true;
    CHECK_NOTHROW(load_collection(cfg));
}

}  // TEST_SUITE

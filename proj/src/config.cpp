#include "miir/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "miir/common.hpp"

namespace miir {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got \"" + v + "\"");
}

template <typename T>
T parse_number(const std::string& v, const std::string& key) {
    T out{};
    std::istringstream ss(v);
    ss >> out;
    if (ss.fail() || !ss.eof()) throw ConfigError(key + ": expected a number, got \"" + v + "\"");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& v, const std::string& key) {
    std::vector<std::size_t> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_number<std::size_t>(item, key));
    }
    if (out.empty()) throw ConfigError(key + ": expected a comma-separated list of integers");
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& values) {
    std::string out;
    for (auto v: values) {
        if (!out.empty()) out += ',';
        out += std::to_string(v);
    }
    return out;
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "paths.passages") paths.passages = v;
    else if (key == "paths.queries") paths.queries = v;
    else if (key == "paths.qrels") paths.qrels = v;
    else if (key == "paths.qrels_format") paths.qrels_format = v;
    else if (key == "paths.index") paths.index_path = v;
    else if (key == "paths.output_dir") paths.output_dir = v;
    else if (key == "analyzer.min_token_len") analyzer.min_token_len = parse_number<std::size_t>(v, key);
    else if (key == "analyzer.remove_stopwords") analyzer.remove_stopwords = parse_bool(v, key);
    else if (key == "bm25.k1") bm25.k1 = parse_number<double>(v, key);
    else if (key == "bm25.b") bm25.b = parse_number<double>(v, key);
    else if (key == "bm25.depth") depth = parse_number<std::size_t>(v, key);
    else if (key == "rm3.enabled") rm3_enabled = parse_bool(v, key);
    else if (key == "rm3.fb_docs") rm3.fb_docs = parse_number<std::size_t>(v, key);
    else if (key == "rm3.fb_terms") rm3.fb_terms = parse_number<std::size_t>(v, key);
    else if (key == "rm3.mix") rm3.mix = parse_number<double>(v, key);
    else if (key == "facet.k") facet_k = parse_number<std::size_t>(v, key);
    else if (key == "embed.provider") embed.provider = v;
    else if (key == "embed.dim") embed.dim = parse_number<std::size_t>(v, key);
    else if (key == "embed.seed") embed.seed = parse_number<std::uint64_t>(v, key);
    else if (key == "gateway.url") gateway.base_url = v;
    else if (key == "gateway.timeout_ms") gateway.timeout_ms = parse_number<int>(v, key);
    else if (key == "gateway.retries") gateway.retries = parse_number<int>(v, key);
    else if (key == "gateway.backoff_ms") gateway.backoff_ms = parse_number<int>(v, key);
    else if (key == "gateway.nucleus_p") gateway.nucleus_p = parse_number<double>(v, key);
    else if (key == "gateway.max_in_flight") gateway.max_in_flight = parse_number<int>(v, key);
    else if (key == "generator.kind") generator.kind = v;
    else if (key == "generator.fallback_to_template") generator.fallback_to_template = parse_bool(v, key);
    else if (key == "answerer.kind") answerer.kind = v;
    else if (key == "answerer.theta") answerer.theta = parse_number<double>(v, key);
    else if (key == "scorer.kind") scorer.kind = v;
    else if (key == "scorer.alpha") scorer.alpha = parse_number<double>(v, key);
    else if (key == "scorer.beta") scorer.beta = parse_number<double>(v, key);
    else if (key == "session.t_max") session.t_max = parse_number<int>(v, key);
    else if (key == "session.fixed_facet_list") session.fixed_facet_list = parse_bool(v, key);
    else if (key == "eval.rbo_p") eval.rbo_p = parse_number<double>(v, key);
    else if (key == "eval.mrr_cutoffs") eval.mrr_cutoffs = parse_size_list(v, key);
    else if (key == "eval.ndcg_cutoffs") eval.ndcg_cutoffs = parse_size_list(v, key);
    else if (key == "seed") seed = parse_number<std::uint64_t>(v, key);
    else if (key == "lenient_qrels") lenient_qrels = parse_bool(v, key);
    else if (key == "jobs") jobs = parse_number<std::size_t>(v, key);
    else if (key == "augment.max_pos") max_pos = parse_number<std::size_t>(v, key);
    else if (key == "augment.max_neg") max_neg = parse_number<std::size_t>(v, key);
    else throw ConfigError("unknown config key: " + key);
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    Config cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.resize(hash_pos);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected `key = value`");
        }
        try {
            cfg.set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

void Config::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (bm25.k1 < 0.0) throw ConfigError("bm25.k1 must be >= 0");
    if (!in_unit(bm25.b)) throw ConfigError("bm25.b must lie in [0,1]");
    if (depth < 1) throw ConfigError("bm25.depth must be >= 1");
    if (rm3.fb_docs < 1) throw ConfigError("rm3.fb_docs must be >= 1");
    if (rm3.fb_terms < 1) throw ConfigError("rm3.fb_terms must be >= 1");
    if (!in_unit(rm3.mix)) throw ConfigError("rm3.mix must lie in [0,1]");
    if (facet_k < 1) throw ConfigError("facet.k must be >= 1");
    if (embed.provider != "local" && embed.provider != "remote") {
        throw ConfigError("embed.provider must be local or remote");
    }
    if (embed.dim < 1) throw ConfigError("embed.dim must be >= 1");
    gateway.validate();
    if (generator.kind != "template" && generator.kind != "remote") {
        throw ConfigError("generator.kind must be template or remote");
    }
    if (answerer.kind != "lexical" && answerer.kind != "remote") {
        throw ConfigError("answerer.kind must be lexical or remote");
    }
    if (!in_unit(answerer.theta)) throw ConfigError("answerer.theta must lie in [0,1]");
    if (scorer.kind != "local" && scorer.kind != "remote") {
        throw ConfigError("scorer.kind must be local or remote");
    }
    if (session.t_max < 1) throw ConfigError("session.t_max must be >= 1");
    if (eval.rbo_p <= 0.0 || eval.rbo_p >= 1.0) throw ConfigError("eval.rbo_p must lie in (0,1)");
    for (auto k: eval.mrr_cutoffs) {
        if (k < 1) throw ConfigError("eval.mrr_cutoffs entries must be >= 1");
    }
    for (auto k: eval.ndcg_cutoffs) {
        if (k < 1) throw ConfigError("eval.ndcg_cutoffs entries must be >= 1");
    }
    if (paths.qrels_format != "trec" && paths.qrels_format != "hardneg_jsonl") {
        throw ConfigError("paths.qrels_format must be trec or hardneg_jsonl");
    }
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

std::string Config::canonical_string() const {
    std::map<std::string, std::string> kv;
    auto num = [](double v) {
        std::ostringstream ss;
        ss.precision(17);
        ss << v;
        return ss.str();
    };
    kv["paths.passages"] = paths.passages;
    kv["paths.queries"] = paths.queries;
    kv["paths.qrels"] = paths.qrels;
    kv["paths.qrels_format"] = paths.qrels_format;
    kv["paths.index"] = paths.index_path;
    kv["paths.output_dir"] = paths.output_dir;
    kv["analyzer.min_token_len"] = std::to_string(analyzer.min_token_len);
    kv["analyzer.remove_stopwords"] = analyzer.remove_stopwords ? "true" : "false";
    kv["bm25.k1"] = num(bm25.k1);
    kv["bm25.b"] = num(bm25.b);
    kv["bm25.depth"] = std::to_string(depth);
    kv["rm3.enabled"] = rm3_enabled ? "true" : "false";
    kv["rm3.fb_docs"] = std::to_string(rm3.fb_docs);
    kv["rm3.fb_terms"] = std::to_string(rm3.fb_terms);
    kv["rm3.mix"] = num(rm3.mix);
    kv["facet.k"] = std::to_string(facet_k);
    kv["embed.provider"] = embed.provider;
    kv["embed.dim"] = std::to_string(embed.dim);
    kv["embed.seed"] = std::to_string(embed.seed);
    kv["gateway.url"] = gateway.base_url;
    kv["gateway.timeout_ms"] = std::to_string(gateway.timeout_ms);
    kv["gateway.retries"] = std::to_string(gateway.retries);
    kv["gateway.backoff_ms"] = std::to_string(gateway.backoff_ms);
    kv["gateway.nucleus_p"] = num(gateway.nucleus_p);
    kv["gateway.max_in_flight"] = std::to_string(gateway.max_in_flight);
    kv["generator.kind"] = generator.kind;
    kv["generator.fallback_to_template"] = generator.fallback_to_template ? "true" : "false";
    kv["answerer.kind"] = answerer.kind;
    kv["answerer.theta"] = num(answerer.theta);
    kv["scorer.kind"] = scorer.kind;
    kv["scorer.alpha"] = num(scorer.alpha);
    kv["scorer.beta"] = num(scorer.beta);
    kv["session.t_max"] = std::to_string(session.t_max);
    kv["session.fixed_facet_list"] = session.fixed_facet_list ? "true" : "false";
    kv["eval.rbo_p"] = num(eval.rbo_p);
    kv["eval.mrr_cutoffs"] = join_sizes(eval.mrr_cutoffs);
    kv["eval.ndcg_cutoffs"] = join_sizes(eval.ndcg_cutoffs);
    kv["seed"] = std::to_string(seed);
    kv["lenient_qrels"] = lenient_qrels ? "true" : "false";
    kv["jobs"] = std::to_string(jobs);
    kv["augment.max_pos"] = max_pos ? std::to_string(*max_pos) : "";
    kv["augment.max_neg"] = max_neg ? std::to_string(*max_neg) : "";

    std::string out;
    for (const auto& [key, value]: kv) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

std::uint64_t Config::hash() const {
    return fnv1a(canonical_string());
}

}  // namespace miir

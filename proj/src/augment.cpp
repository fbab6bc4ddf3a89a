#include "miir/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "miir/common.hpp"
#include "miir/parallel.hpp"

namespace miir {

using nlohmann::json;

std::uint64_t sample_key(std::uint64_t seed, const std::string& qid, std::string_view salt,
                         const std::string& pid) {
    std::uint64_t h = fnv1a_u64(seed);
    h = fnv1a(qid, h);
    h = fnv1a(salt, h);
    h = fnv1a(pid, h);
    return h;
}

std::optional<std::string> sample_intent_pid(const Judgment& judgment, std::uint64_t seed,
                                             const std::string& qid) {
    if (judgment.positives.empty()) return std::nullopt;
    const std::string* best = nullptr;
    std::uint64_t best_key = 0;
    for (const auto& pid: judgment.positives) {
        const auto key = sample_key(seed, qid, "intent", pid);
        if (best == nullptr || key < best_key || (key == best_key && pid < *best)) {
            best = &pid;
            best_key = key;
        }
    }
    return *best;
}

namespace {

// Keeps at most `cap` facets, chosen by smallest sampling key, emitted in the
// original (ascending passage id) order.
void apply_cap(std::vector<Facet>& facets, std::optional<std::size_t> cap, std::uint64_t seed,
               const std::string& qid, std::string_view salt) {
    if (!cap || facets.size() <= *cap) return;
    std::vector<std::size_t> order(facets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ka = sample_key(seed, qid, salt, facets[a].source_passage_id);
        const auto kb = sample_key(seed, qid, salt, facets[b].source_passage_id);
        if (ka != kb) return ka < kb;
        return facets[a].source_passage_id < facets[b].source_passage_id;
    });
    order.resize(*cap);
    std::sort(order.begin(), order.end());
    std::vector<Facet> kept;
    kept.reserve(*cap);
    for (auto i: order) kept.push_back(std::move(facets[i]));
    facets = std::move(kept);
}

}  // namespace

AugmentedDataset augment_offline(const Collection& collection, const EmbeddingProvider& provider,
                                 const QuestionGenerator& generator, std::size_t facet_k, AugmentCaps caps,
                                 std::uint64_t seed, AugmentReport* report, std::size_t jobs) {
    if (collection.qrels.by_query.empty()) throw InputError("offline augmentation needs non-empty qrels");

    struct PerQuery {
        std::vector<Interaction> interactions;
        std::size_t facet_failures = 0;
        std::size_t generation_failures = 0;
    };

    std::vector<const std::string*> qids;
    qids.reserve(collection.qrels.by_query.size());
    for (const auto& [qid, judgment]: collection.qrels.by_query) qids.push_back(&qid);

    std::vector<PerQuery> results(qids.size());
    parallel_for(qids.size(), jobs, [&](std::size_t i) {
        const auto& qid = *qids[i];
        auto& slot = results[i];
        auto query_it = collection.queries.find(qid);
        if (query_it == collection.queries.end()) return;  // unreachable with loaded qrels
        const Query& query = query_it->second;

        auto sets = build_facet_sets(query, collection.qrels, collection.passages, provider, facet_k);
        slot.facet_failures = sets.skipped;
        apply_cap(sets.positives, caps.max_pos, seed, qid, "cap+");
        apply_cap(sets.negatives, caps.max_neg, seed, qid, "cap-");

        auto emit = [&](std::vector<Facet>& facets) {
            for (auto& facet: facets) {
                Interaction x;
                x.query_id = qid;
                x.turn = 1;
                try {
                    auto generated = generator.question(query.text, facet);
                    x.question = std::move(generated.text);
                    x.gen = generated.gen;
                } catch (const Error&) {
                    ++slot.generation_failures;
                    continue;
                }
                x.answer = heuristic_answer(facet);
                x.ans_src = AnswerSource::heuristic;
                x.facet = std::move(facet);
                slot.interactions.push_back(std::move(x));
            }
        };
        emit(sets.positives);
        emit(sets.negatives);
    });

    AugmentedDataset dataset;
    dataset.seed = seed;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto& slot = results[i];
        if (report != nullptr) {
            report->facet_failures += slot.facet_failures;
            report->generation_failures += slot.generation_failures;
            if (slot.interactions.empty()) report->empty_queries.push_back(*qids[i]);
        }
        std::move(slot.interactions.begin(), slot.interactions.end(), std::back_inserter(dataset.interactions));
    }
    return dataset;
}

OnlineInteraction augment_online(const Collection& collection, const InvertedIndex& index,
                                 const EmbeddingProvider& provider, const QuestionGenerator& generator,
                                 const UserSimulator& simulator, const Query& query, std::size_t depth,
                                 std::size_t facet_k, std::uint64_t seed, Bm25Params bm25) {
    if (query.text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw InputError("online augmentation needs non-empty query text");
    }

    auto ranking = index.bm25_search(query.text, depth, bm25);
    ranking.query_id = query.id;
    if (ranking.empty()) {
        throw DomainError("online augmentation: BM25 retrieved nothing for query " + query.id);
    }

    const auto& top_pid = ranking.items.front().pid;
    auto facet = extract_facet(collection.passages.at(top_pid), provider, facet_k);
    facet.query_id = query.id;
    if (collection.qrels.has(query.id)) {
        const auto& judgment = collection.qrels.at(query.id);
        if (judgment.positives.contains(top_pid)) facet.polarity = Polarity::positive;
        else if (judgment.negatives.contains(top_pid)) facet.polarity = Polarity::negative;
    }

    std::optional<std::string> intent_pid;
    if (collection.qrels.has(query.id)) {
        intent_pid = sample_intent_pid(collection.qrels.at(query.id), seed, query.id);
    }
    if (!intent_pid) {
        throw DomainError("query " + query.id +
                          " has no positive judgment to serve as intent; the selected simulator needs one "
                          "(use offline augmentation with heuristic answers instead)");
    }

    Interaction x;
    x.query_id = query.id;
    x.turn = 1;
    auto generated = generator.question(query.text, facet);
    x.question = std::move(generated.text);
    x.gen = generated.gen;
    x.answer = simulator.answer(query.text, collection.passages.at(*intent_pid).text, x.question);
    x.ans_src = simulator.source();
    x.intent_passage_id = intent_pid;
    x.facet = std::move(facet);
    return {std::move(x), std::move(ranking)};
}

double EmbedPairScorer::score(const std::string& query_text, const std::string& passage_text) const {
    auto vecs = provider_.embed({query_text, passage_text});
    return cosine(vecs[0], vecs[1]);
}

RemotePairScorer::RemotePairScorer(std::shared_ptr<GatewayClient> gateway): gateway_(std::move(gateway)) {
    if (!gateway_) throw ConfigError("remote pair scorer needs a gateway client");
}

double RemotePairScorer::score(const std::string& query_text, const std::string& passage_text) const {
    return gateway_->score("Query: " + query_text + " Document: " + passage_text);
}

DenoiseResult denoise_negatives(const Collection& collection, const PairScorer& scorer, double threshold) {
    DenoiseResult result;
    result.collection = collection;
    result.observed_min = std::numeric_limits<double>::infinity();
    result.observed_max = -std::numeric_limits<double>::infinity();

    bool any = false;
    for (auto& [qid, judgment]: result.collection.qrels.by_query) {
        auto query_it = result.collection.queries.find(qid);
        if (query_it == result.collection.queries.end()) continue;
        std::set<std::string> kept;
        for (const auto& pid: judgment.negatives) {
            const double s = scorer.score(query_it->second.text, result.collection.passages.at(pid).text);
            any = true;
            result.observed_min = std::min(result.observed_min, s);
            result.observed_max = std::max(result.observed_max, s);
            if (s >= threshold) {
                ++result.removed;
            } else {
                kept.insert(pid);
            }
        }
        judgment.negatives = std::move(kept);
    }
    if (!any) {
        result.observed_min = result.observed_max = 0.0;
    } else if (threshold < result.observed_min || threshold > result.observed_max) {
        result.threshold_out_of_range = true;
    }
    return result;
}

namespace {

std::size_t whitespace_token_count(const std::string& text) {
    std::istringstream ss(text);
    std::string tok;
    std::size_t n = 0;
    while (ss >> tok) ++n;
    return n;
}

}  // namespace

DatasetStats compute_stats(const AugmentedDataset& dataset, const Collection& collection) {
    if (dataset.interactions.empty()) throw InputError("cannot compute statistics of an empty dataset");

    DatasetStats stats;
    stats.query_count = collection.queries.size();
    stats.passage_count = collection.passages.size();

    std::set<std::string> qids;
    std::size_t positive = 0;
    std::size_t total_question_tokens = 0;
    for (const auto& x: dataset.interactions) {
        qids.insert(x.query_id);
        if (x.answer == Answer::yes) ++positive;
        total_question_tokens += whitespace_token_count(x.question);
    }
    const auto n = static_cast<double>(dataset.interactions.size());
    stats.interactions_per_query_mean = n / static_cast<double>(qids.size());
    stats.mean_question_length = static_cast<double>(total_question_tokens) / n;
    stats.positive_answer_fraction = static_cast<double>(positive) / n;
    stats.negative_answer_fraction = static_cast<double>(dataset.interactions.size() - positive) / n;
    return stats;
}

void write_interactions_jsonl(const std::string& path, const std::vector<Interaction>& interactions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& x: interactions) out << x.to_json().dump() << '\n';
}

std::vector<Interaction> load_interactions_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<Interaction> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        try {
            out.push_back(Interaction::from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

double calibrate_theta(const AugmentedDataset& dataset, const Collection& collection) {
    if (dataset.interactions.empty()) throw InputError("theta calibration needs a non-empty dataset");

    double best_theta = 0.1;
    std::size_t best_agree = 0;
    for (int step = 1; step <= 9; ++step) {
        const double theta = step / 10.0;
        std::size_t agree = 0;
        for (const auto& x: dataset.interactions) {
            if (!x.facet.polarity) continue;
            const auto& intent_pid =
                x.intent_passage_id ? *x.intent_passage_id : x.facet.source_passage_id;
            auto pit = collection.passages.find(intent_pid);
            auto qit = collection.queries.find(x.query_id);
            if (pit == collection.passages.end() || qit == collection.queries.end()) continue;
            const auto predicted = lexical_sim_answer(qit->second.text, pit->second.text, x.question, theta);
            if (predicted == heuristic_answer(x.facet)) ++agree;
        }
        if (agree > best_agree) {
            best_agree = agree;
            best_theta = theta;
        }
    }
    return best_theta;
}

double calibrate_denoise_threshold(const std::vector<LabeledPair>& labeled, const PairScorer& scorer) {
    if (labeled.empty()) throw InputError("threshold calibration needs labeled pairs");

    struct ScoredPair {
        double score;
        bool true_negative;
    };
    std::vector<ScoredPair> scored;
    scored.reserve(labeled.size());
    for (const auto& pair: labeled) {
        scored.push_back({scorer.score(pair.query_text, pair.passage_text), pair.true_negative});
    }

    // Candidate thresholds: each observed score, plus one above the maximum
    // (remove nothing). Retained = pairs scoring below the threshold.
    std::vector<double> candidates;
    for (const auto& sp: scored) candidates.push_back(sp.score);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    candidates.push_back(candidates.back() + 1.0);

    double best_threshold = candidates.back();
    double best_precision = -1.0;
    std::size_t best_retained = 0;
    for (const double threshold: candidates) {
        std::size_t retained = 0;
        std::size_t retained_true_neg = 0;
        for (const auto& sp: scored) {
            if (sp.score < threshold) {
                ++retained;
                if (sp.true_negative) ++retained_true_neg;
            }
        }
        if (retained == 0) continue;
        const double precision = static_cast<double>(retained_true_neg) / static_cast<double>(retained);
        if (precision > best_precision || (precision == best_precision && retained > best_retained)) {
            best_precision = precision;
            best_retained = retained;
            best_threshold = threshold;
        }
    }
    return best_threshold;
}

}  // namespace miir

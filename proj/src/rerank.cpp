#include "miir/rerank.hpp"

#include <algorithm>
#include <cmath>

#include "miir/analyzer.hpp"
#include "miir/common.hpp"
#include "miir/eval.hpp"

namespace miir {

namespace {

// log(sigmoid(z)) without overflow on either tail.
double log_sigmoid(double z) {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

}  // namespace

LocalInteractionScorer::LocalInteractionScorer(const Ranking& cohort, LocalScorerParams params)
    : params_(params) {
    if (cohort.empty()) throw InputError("local scorer needs a non-empty cohort ranking");
    double lo = cohort.items.front().score;
    double hi = lo;
    for (const auto& item: cohort.items) {
        lo = std::min(lo, item.score);
        hi = std::max(hi, item.score);
    }
    for (const auto& item: cohort.items) {
        normalized_[item.pid] = hi == lo ? 0.5 : (item.score - lo) / (hi - lo);
    }
}

double LocalInteractionScorer::normalized_bm25(const std::string& pid) const {
    auto it = normalized_.find(pid);
    if (it == normalized_.end()) {
        throw DomainError("passage " + pid + " is outside the scorer's normalization cohort");
    }
    return it->second;
}

double LocalInteractionScorer::facet_coverage(const Facet& facet, const Passage& passage) {
    if (facet.words.empty()) return 0.0;
    static const Analyzer analyzer(AnalyzerOptions{2, false});
    auto tokens = analyzer.tokenize(passage.text);
    std::set<std::string> present(tokens.begin(), tokens.end());
    std::size_t hit = 0;
    for (const auto& w: facet.words) {
        if (present.contains(w)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(facet.words.size());
}

double LocalInteractionScorer::score(const std::string&, const Passage& passage,
                                     const Interaction& interaction) const {
    const double sign = interaction.answer == Answer::yes ? 1.0 : -1.0;
    const double z = params_.alpha * normalized_bm25(passage.id) +
                     params_.beta * sign * facet_coverage(interaction.facet, passage);
    return log_sigmoid(z);
}

RemoteInteractionScorer::RemoteInteractionScorer(std::shared_ptr<GatewayClient> gateway)
    : gateway_(std::move(gateway)) {
    if (!gateway_) throw ConfigError("remote scorer needs a gateway client");
}

double remote_score(const GatewayClient& gateway, const std::string& query_text,
                    const std::string& passage_text, const Interaction& interaction) {
    const double value =
        gateway.score(serialize_rank_prompt(query_text, passage_text, interaction.question, interaction.answer));
    if (!std::isfinite(value) || value > 0.0) {
        throw ProtocolError("gateway logprob_true must be finite and <= 0, got " + std::to_string(value));
    }
    return value;
}

double RemoteInteractionScorer::score(const std::string& query_text, const Passage& passage,
                                      const Interaction& interaction) const {
    return remote_score(*gateway_, query_text, passage.text, interaction);
}

Ranking rerank_once(const Ranking& ranking, const PassageScorer& scorer, const Query& query,
                    const std::map<std::string, Passage>& passages, const Interaction& interaction,
                    int turn) {
    if (ranking.empty()) throw InputError("rerank needs a non-empty ranking");

    std::vector<ScoredPassage> rescored;
    rescored.reserve(ranking.items.size());
    for (const auto& item: ranking.items) {
        auto pit = passages.find(item.pid);
        if (pit == passages.end()) throw IntegrityError("ranking references unknown passage " + item.pid);
        rescored.push_back({item.pid, scorer.score(query.text, pit->second, interaction)});
    }
    std::stable_sort(rescored.begin(), rescored.end(),
                     [](const ScoredPassage& a, const ScoredPassage& b) { return a.score > b.score; });

    Ranking out{query.id, "rerank:t=" + std::to_string(turn), std::move(rescored)};
    return out;
}

Session run_session(const Collection& collection, const InvertedIndex& index,
                    const EmbeddingProvider& provider, const QuestionGenerator& generator,
                    const UserSimulator& simulator, const ScorerFactory& scorer_factory, const Query& query,
                    SessionOptions options, std::uint64_t seed) {
    if (options.t_max < 1) throw InputError("t_max must be >= 1");

    Session session;
    session.query_id = query.id;
    session.initial = index.bm25_search(query.text, options.depth, options.bm25);
    session.initial.query_id = query.id;
    if (session.initial.empty()) {
        throw DomainError("session: BM25 retrieved nothing for query " + query.id);
    }

    const std::set<std::string>* positives = nullptr;
    std::optional<std::string> intent_pid;
    if (collection.qrels.has(query.id)) {
        const auto& judgment = collection.qrels.at(query.id);
        positives = &judgment.positives;
        intent_pid = sample_intent_pid(judgment, seed, query.id);
    }
    if (!intent_pid) {
        throw DomainError("query " + query.id +
                          " has no positive judgment to serve as intent; the selected simulator needs one "
                          "(use offline augmentation with heuristic answers instead)");
    }
    const std::string& intent_text = collection.passages.at(*intent_pid).text;

    auto scorer = scorer_factory(session.initial);

    std::vector<double> scores;
    scores.reserve(session.initial.items.size());
    for (const auto& item: session.initial.items) scores.push_back(item.score);
    session.initial_entropy = ranking_entropy(scores);
    if (positives != nullptr) {
        session.initial_reciprocal_rank = mrr_at_k(session.initial, *positives, session.initial.size());
    }

    // Cumulative totals start at zero; stable re-sorts keep the initial
    // (BM25, id-broken) order for ties.
    std::vector<ScoredPassage> current = session.initial.items;
    for (auto& item: current) {
        session.cumulative[item.pid] = 0.0;
        item.score = 0.0;
    }

    for (int t = 1; t <= options.t_max; ++t) {
        // Facet source: top unused passage of the current ranking, or of the
        // initial ranking when fixed_facet_list is set. Extraction failures
        // consume the candidate and move on.
        const std::vector<ScoredPassage>* pool;
        std::vector<ScoredPassage> fixed_pool;
        if (options.fixed_facet_list) {
            fixed_pool = session.initial.items;
            pool = &fixed_pool;
        } else {
            pool = &current;
        }

        std::optional<Facet> facet;
        while (!facet) {
            const ScoredPassage* source = nullptr;
            for (const auto& item: *pool) {
                if (!session.used_pids.contains(item.pid)) {
                    source = &item;
                    break;
                }
            }
            if (source == nullptr) break;
            try {
                facet = extract_facet(collection.passages.at(source->pid), provider, options.facet_k);
                facet->query_id = query.id;
                if (collection.qrels.has(query.id)) {
                    const auto& judgment = collection.qrels.at(query.id);
                    if (judgment.positives.contains(source->pid)) facet->polarity = Polarity::positive;
                    else if (judgment.negatives.contains(source->pid)) facet->polarity = Polarity::negative;
                }
                session.used_pids.insert(source->pid);
            } catch (const DomainError&) {
                session.used_pids.insert(source->pid);
            }
        }
        if (!facet) break;  // candidate exhaustion: session ends early

        SessionTurn record;
        record.turn = t;
        record.interaction.query_id = query.id;
        record.interaction.turn = t;
        auto generated = generator.question(query.text, *facet);
        record.interaction.question = std::move(generated.text);
        record.interaction.gen = generated.gen;
        record.interaction.answer = simulator.answer(query.text, intent_text, record.interaction.question);
        record.interaction.ans_src = simulator.source();
        record.interaction.intent_passage_id = intent_pid;
        record.interaction.facet = std::move(*facet);

        for (auto& item: current) {
            const double s =
                scorer->score(query.text, collection.passages.at(item.pid), record.interaction);
            session.cumulative[item.pid] += s;
            item.score = session.cumulative[item.pid];
        }
        std::stable_sort(current.begin(), current.end(),
                         [](const ScoredPassage& a, const ScoredPassage& b) { return a.score > b.score; });

        record.ranking = Ranking{query.id, "rerank:t=" + std::to_string(t), current};
        std::vector<double> cumulative_scores;
        cumulative_scores.reserve(current.size());
        for (const auto& item: current) cumulative_scores.push_back(item.score);
        record.entropy = ranking_entropy(cumulative_scores);
        if (positives != nullptr) {
            record.reciprocal_rank = mrr_at_k(record.ranking, *positives, record.ranking.size());
        }
        session.turns.push_back(std::move(record));
    }
    return session;
}

}  // namespace miir

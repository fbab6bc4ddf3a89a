#include "miir/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "miir/common.hpp"

namespace miir {

using nlohmann::json;

double mrr_at_k(const Ranking& ranking, const std::set<std::string>& positives, std::size_t k) {
    if (k < 1) throw InputError("k must be >= 1");
    const std::size_t depth = std::min(k, ranking.items.size());
    for (std::size_t i = 0; i < depth; ++i) {
        if (positives.contains(ranking.items[i].pid)) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

double ndcg_at_k(const Ranking& ranking, const std::set<std::string>& positives, std::size_t k) {
    if (k < 1) throw InputError("k must be >= 1");
    if (positives.empty()) return 0.0;

    double dcg = 0.0;
    const std::size_t depth = std::min(k, ranking.items.size());
    for (std::size_t i = 0; i < depth; ++i) {
        if (positives.contains(ranking.items[i].pid)) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
    }
    double ideal = 0.0;
    const std::size_t ideal_depth = std::min(k, positives.size());
    for (std::size_t i = 0; i < ideal_depth; ++i) ideal += 1.0 / std::log2(static_cast<double>(i + 2));
    return dcg / ideal;
}

namespace {

std::vector<std::string> meteor_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        std::transform(tok.begin(), tok.end(), tok.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        out.push_back(std::move(tok));
    }
    return out;
}

}  // namespace

double meteor(const std::string& hypothesis, const std::string& reference) {
    const auto hyp = meteor_tokens(hypothesis);
    const auto ref = meteor_tokens(reference);
    if (hyp.empty() || ref.empty()) throw InputError("meteor needs non-empty texts");

    // Leftmost-greedy exact alignment: each hypothesis token takes the first
    // unused identical reference position.
    std::vector<bool> ref_used(ref.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (hyp pos, ref pos)
    for (std::size_t i = 0; i < hyp.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (!ref_used[j] && hyp[i] == ref[j]) {
                ref_used[j] = true;
                matches.emplace_back(i, j);
                break;
            }
        }
    }
    if (matches.empty()) return 0.0;

    const auto m = static_cast<double>(matches.size());
    std::size_t chunks = 1;
    for (std::size_t i = 1; i < matches.size(); ++i) {
        if (matches[i].first != matches[i - 1].first + 1 || matches[i].second != matches[i - 1].second + 1) {
            ++chunks;
        }
    }

    const double precision = m / static_cast<double>(hyp.size());
    const double recall = m / static_cast<double>(ref.size());
    const double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    const double penalty = 0.5 * std::pow(static_cast<double>(chunks) / m, 3.0);
    return fmean * (1.0 - penalty);
}

double cosim(const std::vector<std::string>& questions, const std::vector<std::string>& references,
             const EmbeddingProvider& provider) {
    if (questions.size() != references.size()) throw InputError("cosim needs equal-length lists");
    if (questions.empty()) throw InputError("cosim needs at least one pair");
    const auto qv = provider.embed(questions);
    const auto rv = provider.embed(references);
    double sum = 0.0;
    for (std::size_t i = 0; i < qv.size(); ++i) sum += cosine(qv[i], rv[i]);
    return sum / static_cast<double>(qv.size());
}

double ranking_entropy(const std::vector<double>& scores) {
    if (scores.empty()) throw InputError("entropy needs at least one score");
    double max_score = scores.front();
    for (double s: scores) {
        if (!std::isfinite(s)) throw InputError("entropy: non-finite score");
        max_score = std::max(max_score, s);
    }
    double z = 0.0;
    for (double s: scores) z += std::exp(s - max_score);
    double entropy = 0.0;
    for (double s: scores) {
        const double p = std::exp(s - max_score) / z;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return entropy;
}

namespace {

double rbo_impl(const std::vector<std::string>& s, const std::vector<std::string>& t, double p, RboMode mode) {
    if (p <= 0.0 || p >= 1.0) throw InputError("rbo persistence must lie in (0,1)");
    if (s.empty() || t.empty()) throw InputError("rbo needs non-empty rankings");

    auto check_unique = [](const std::vector<std::string>& ids) {
        std::unordered_set<std::string> seen(ids.begin(), ids.end());
        if (seen.size() != ids.size()) throw InputError("rbo rankings must not repeat items");
    };
    check_unique(s);
    check_unique(t);

    // Incremental overlap: the intersection size at depth d+1 grows by the
    // number of cross-list hits among the two new items.
    const std::size_t depth = std::min(s.size(), t.size());
    std::unordered_set<std::string> seen_s, seen_t;
    std::size_t overlap = 0;
    double sum = 0.0;
    double weight = 1.0;  // p^(d-1)
    double final_agreement = 0.0;
    for (std::size_t d = 0; d < depth; ++d) {
        if (s[d] == t[d]) {
            ++overlap;
        } else {
            if (seen_t.contains(s[d])) ++overlap;
            if (seen_s.contains(t[d])) ++overlap;
            seen_s.insert(s[d]);
            seen_t.insert(t[d]);
        }
        final_agreement = static_cast<double>(overlap) / static_cast<double>(d + 1);
        sum += weight * final_agreement;
        weight *= p;
    }
    const double rbo_min_value = (1.0 - p) * sum;
    if (mode == RboMode::min) return rbo_min_value;
    // Tail extrapolation: agreement assumed to stay at A_D beyond depth D.
    return rbo_min_value + final_agreement * std::pow(p, static_cast<double>(depth));
}

}  // namespace

double rbo(const std::vector<std::string>& s, const std::vector<std::string>& t, double p, RboMode mode) {
    return rbo_impl(s, t, p, mode);
}

double rbo(const Ranking& s, const Ranking& t, double p, RboMode mode) {
    return rbo_impl(s.ids(), t.ids(), p, mode);
}

json MetricReport::to_json() const {
    json metrics = json::object();
    for (const auto& [name, values]: per_query) {
        metrics[name] = {{"per_query", values}, {"mean", macro.at(name)}};
    }
    return {
        {"metrics", metrics},
        {"metadata",
         {{"mrr_cutoffs", mrr_cutoffs},
          {"ndcg_cutoffs", ndcg_cutoffs},
          {"rbo_p", rbo_p},
          {"entropy_base", entropy_base},
          {"queries_evaluated", queries_evaluated},
          {"queries_without_positives", queries_without_positives}}},
    };
}

std::string MetricReport::to_table() const {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    out << std::setw(12) << std::left << "metric" << std::right << std::setw(10) << "mean" << '\n';
    for (const auto& [name, mean]: macro) {
        out << std::setw(12) << std::left << name << std::right << std::setw(10) << mean << '\n';
    }
    out << "queries: " << queries_evaluated;
    if (queries_without_positives > 0) {
        out << "  (warning: " << queries_without_positives << " without positive judgments)";
    }
    out << '\n';
    return out.str();
}

MetricReport evaluate_run(const std::map<std::string, Ranking>& run, const Qrels& qrels,
                          const std::vector<std::size_t>& mrr_cutoffs,
                          const std::vector<std::size_t>& ndcg_cutoffs) {
    MetricReport report;
    report.mrr_cutoffs = mrr_cutoffs;
    report.ndcg_cutoffs = ndcg_cutoffs;
    report.queries_evaluated = run.size();

    static const std::set<std::string> kNoPositives;
    for (const auto& [qid, ranking]: run) {
        const std::set<std::string>* positives = &kNoPositives;
        if (qrels.has(qid)) positives = &qrels.at(qid).positives;
        if (positives->empty()) ++report.queries_without_positives;
        for (auto k: mrr_cutoffs) {
            report.per_query["mrr@" + std::to_string(k)][qid] = mrr_at_k(ranking, *positives, k);
        }
        for (auto k: ndcg_cutoffs) {
            report.per_query["ndcg@" + std::to_string(k)][qid] = ndcg_at_k(ranking, *positives, k);
        }
    }
    for (const auto& [name, values]: report.per_query) {
        double sum = 0.0;
        for (const auto& [qid, v]: values) sum += v;
        report.macro[name] = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    }
    return report;
}

}  // namespace miir

#include "miir/facet.hpp"

#include <algorithm>

#include "miir/common.hpp"

namespace miir {

std::string to_string(Polarity p) {
    return p == Polarity::positive ? "positive" : "negative";
}

Polarity polarity_from_string(const std::string& s) {
    if (s == "positive") return Polarity::positive;
    if (s == "negative") return Polarity::negative;
    throw ParseError("unknown polarity: " + s);
}

std::string Facet::joined() const {
    std::string out;
    for (const auto& w: words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

nlohmann::json Facet::to_json() const {
    nlohmann::json j = {
        {"qid", query_id},
        {"pid", source_passage_id},
        {"words", words},
    };
    if (polarity) j["polarity"] = to_string(*polarity);
    if (is_short) j["short"] = true;
    return j;
}

Facet Facet::from_json(const nlohmann::json& j) {
    Facet f;
    try {
        f.query_id = j.at("qid").get<std::string>();
        f.source_passage_id = j.at("pid").get<std::string>();
        f.words = j.at("words").get<std::vector<std::string>>();
        if (j.contains("polarity")) f.polarity = polarity_from_string(j.at("polarity").get<std::string>());
        f.is_short = j.value("short", false);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed facet record: ") + e.what());
    }
    return f;
}

std::vector<std::string> facet_candidates(const std::string& text) {
    static const Analyzer analyzer(AnalyzerOptions{3, true});
    auto tokens = analyzer.tokenize(text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
}

Facet extract_facet(const Passage& passage, const EmbeddingProvider& provider, std::size_t k) {
    if (k < 1) throw InputError("facet k must be >= 1");
    auto candidates = facet_candidates(passage.text);
    if (candidates.empty()) {
        throw DomainError("no facet candidates in passage " + passage.id);
    }

    const auto passage_vec = provider.embed_one(passage.text);
    const auto token_vecs = provider.embed(candidates);

    struct Scored {
        double sim;
        const std::string* token;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        scored.push_back({cosine(token_vecs[i], passage_vec), &candidates[i]});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return *a.token < *b.token;
    });

    Facet facet;
    facet.source_passage_id = passage.id;
    facet.is_short = candidates.size() < k;
    const std::size_t take = std::min(k, scored.size());
    facet.words.reserve(take);
    for (std::size_t i = 0; i < take; ++i) facet.words.push_back(*scored[i].token);
    return facet;
}

FacetSets build_facet_sets(const Query& query, const Qrels& qrels,
                           const std::map<std::string, Passage>& passages, const EmbeddingProvider& provider,
                           std::size_t k) {
    const auto& judgment = qrels.at(query.id);  // throws if absent

    FacetSets sets;
    auto extract_side = [&](const std::set<std::string>& pids, Polarity polarity, std::vector<Facet>& out) {
        for (const auto& pid: pids) {
            auto pit = passages.find(pid);
            if (pit == passages.end()) {
                ++sets.skipped;
                continue;
            }
            try {
                auto facet = extract_facet(pit->second, provider, k);
                facet.polarity = polarity;
                facet.query_id = query.id;
                out.push_back(std::move(facet));
            } catch (const Error&) {
                ++sets.skipped;
            }
        }
    };
    extract_side(judgment.positives, Polarity::positive, sets.positives);
    extract_side(judgment.negatives, Polarity::negative, sets.negatives);
    return sets;
}

}  // namespace miir

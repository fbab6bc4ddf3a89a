#include "miir/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "miir/common.hpp"

namespace miir {

namespace {

constexpr char kIndexMagic[] = "MIIRIDX1";

double bm25_idf(std::size_t num_docs, std::size_t df) {
    return std::log(1.0 + (static_cast<double>(num_docs) - static_cast<double>(df) + 0.5) /
                              (static_cast<double>(df) + 0.5));
}

double bm25_tf(double tf, double k1, double b, double len, double avg_len) {
    return tf / (tf + k1 * (1.0 - b + b * len / avg_len));
}

}  // namespace

double WeightedQuery::weight_sum() const {
    double s = 0.0;
    for (const auto& tw: terms) s += tw.weight;
    return s;
}

InvertedIndex InvertedIndex::build(const std::map<std::string, Passage>& passages, const Analyzer& analyzer) {
    if (passages.empty()) throw InputError("cannot build an index over an empty collection");

    InvertedIndex index;
    index.analyzer_ = analyzer;
    index.pids_.reserve(passages.size());
    index.lengths_.reserve(passages.size());

    std::uint64_t total_len = 0;
    for (const auto& [pid, passage]: passages) {
        const auto doc = static_cast<std::uint32_t>(index.pids_.size());
        index.pids_.push_back(pid);
        auto tokens = analyzer.tokenize(passage.text);
        index.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total_len += tokens.size();

        std::map<std::string, std::uint32_t> tf;
        for (auto& t: tokens) ++tf[std::move(t)];
        for (auto& [term, count]: tf) index.postings_[term].push_back({doc, count});
    }
    index.avg_length_ = static_cast<double>(total_len) / static_cast<double>(passages.size());
    index.rebuild_forward();
    return index;
}

void InvertedIndex::rebuild_forward() {
    terms_.clear();
    terms_.reserve(postings_.size());
    forward_.assign(pids_.size(), {});
    std::uint32_t term_idx = 0;
    for (const auto& [term, plist]: postings_) {
        terms_.push_back(&term);
        for (const auto& posting: plist) forward_[posting.doc].emplace_back(term_idx, posting.tf);
        ++term_idx;
    }
}

std::size_t InvertedIndex::doc_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

Ranking InvertedIndex::search_terms(const std::vector<std::pair<std::string, double>>& weighted_terms,
                                    std::size_t k, Bm25Params params, const std::string& tag,
                                    const std::string& query_id) const {
    if (k < 1) throw InputError("k must be >= 1");

    std::unordered_map<std::uint32_t, double> acc;
    for (const auto& [term, weight]: weighted_terms) {
        if (weight <= 0.0) continue;
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double idf = bm25_idf(num_passages(), it->second.size());
        for (const auto& posting: it->second) {
            acc[posting.doc] += weight * idf *
                                bm25_tf(posting.tf, params.k1, params.b, lengths_[posting.doc], avg_length_);
        }
    }

    std::vector<std::pair<std::uint32_t, double>> hits(acc.begin(), acc.end());
    // Ascending doc equals ascending pid: docs were assigned in sorted-pid order.
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (hits.size() > k) hits.resize(k);

    Ranking out{query_id, tag, {}};
    out.items.reserve(hits.size());
    for (const auto& [doc, score]: hits) out.items.push_back({pids_[doc], score});
    return out;
}

Ranking InvertedIndex::bm25_search(const std::string& query_text, std::size_t k, Bm25Params params) const {
    std::vector<std::pair<std::string, double>> terms;
    for (auto& token: analyzer_.tokenize(query_text)) terms.emplace_back(std::move(token), 1.0);
    return search_terms(terms, k, params, "bm25", "");
}

Ranking InvertedIndex::weighted_search(const WeightedQuery& query, std::size_t k, Bm25Params params,
                                       const std::string& tag) const {
    std::vector<std::pair<std::string, double>> terms;
    terms.reserve(query.terms.size());
    for (const auto& tw: query.terms) terms.emplace_back(tw.term, tw.weight);
    return search_terms(terms, k, params, tag, "");
}

WeightedQuery InvertedIndex::query_model(const std::string& query_text) const {
    auto tokens = analyzer_.tokenize(query_text);
    std::map<std::string, double> counts;
    for (auto& t: tokens) counts[std::move(t)] += 1.0;
    WeightedQuery model;
    for (auto& [term, count]: counts) model.terms.push_back({term, count / static_cast<double>(tokens.size())});
    return model;
}

WeightedQuery InvertedIndex::rm3_expand(const std::string& query_text, Rm3Params params, Bm25Params bm25) const {
    if (params.fb_docs < 1) throw InputError("fb_docs must be >= 1");
    if (params.mix < 0.0 || params.mix > 1.0) throw InputError("mix must lie in [0,1]");

    const auto original = query_model(query_text);
    auto feedback = bm25_search(query_text, params.fb_docs, bm25);
    if (feedback.empty() || original.terms.empty()) return original;

    double score_sum = 0.0;
    for (const auto& item: feedback.items) score_sum += item.score;

    // Relevance model: p(w|RM) = sum_d p(d) * tf(w,d)/len(d), with p(d) the
    // BM25 score of d normalized over the feedback set.
    std::map<std::string, double> rm;
    for (const auto& item: feedback.items) {
        const auto doc_it = std::lower_bound(pids_.begin(), pids_.end(), item.pid);
        const auto doc = static_cast<std::uint32_t>(doc_it - pids_.begin());
        const double doc_weight = item.score / score_sum;
        const double len = lengths_[doc];
        for (const auto& [term_idx, tf]: forward_[doc]) {
            rm[*terms_[term_idx]] += doc_weight * static_cast<double>(tf) / len;
        }
    }

    // Keep the fb_terms heaviest terms; ties break lexicographically.
    std::vector<std::pair<std::string, double>> rm_terms(rm.begin(), rm.end());
    std::sort(rm_terms.begin(), rm_terms.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (rm_terms.size() > params.fb_terms) rm_terms.resize(params.fb_terms);
    double rm_sum = 0.0;
    for (const auto& [term, w]: rm_terms) rm_sum += w;

    std::map<std::string, double> mixed;
    for (const auto& tw: original.terms) mixed[tw.term] += params.mix * tw.weight;
    for (const auto& [term, w]: rm_terms) mixed[term] += (1.0 - params.mix) * w / rm_sum;

    WeightedQuery out;
    out.terms.reserve(mixed.size());
    for (auto& [term, w]: mixed) {
        if (w > 0.0) out.terms.push_back({term, w});
    }
    return out;
}

void InvertedIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);

    auto put_u64 = [&](std::uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
        out.write(buf, 8);
    };
    auto put_str = [&](const std::string& s) {
        put_u64(s.size());
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    };

    out.write(kIndexMagic, 8);
    put_u64(analyzer_.options().min_token_len);
    put_u64(analyzer_.options().remove_stopwords ? 1 : 0);
    put_u64(pids_.size());
    for (std::size_t i = 0; i < pids_.size(); ++i) {
        put_str(pids_[i]);
        put_u64(lengths_[i]);
    }
    put_u64(postings_.size());
    for (const auto& [term, plist]: postings_) {
        put_str(term);
        put_u64(plist.size());
        for (const auto& posting: plist) {
            put_u64(posting.doc);
            put_u64(posting.tf);
        }
    }
}

InvertedIndex InvertedIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    auto get_u64 = [&]() -> std::uint64_t {
        char buf[8];
        in.read(buf, 8);
        if (!in) throw ParseError(path + ": truncated index artifact");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
        return v;
    };
    auto get_str = [&]() {
        std::string s(get_u64(), '\0');
        in.read(s.data(), static_cast<std::streamsize>(s.size()));
        if (!in) throw ParseError(path + ": truncated index artifact");
        return s;
    };

    char magic[8];
    in.read(magic, 8);
    if (!in || std::string_view(magic, 8) != kIndexMagic) {
        throw ParseError(path + ": not a miir index artifact (bad header)");
    }

    InvertedIndex index;
    AnalyzerOptions opts;
    opts.min_token_len = get_u64();
    opts.remove_stopwords = get_u64() != 0;
    index.analyzer_ = Analyzer(opts);

    const auto num_docs = get_u64();
    std::uint64_t total_len = 0;
    index.pids_.reserve(num_docs);
    index.lengths_.reserve(num_docs);
    for (std::uint64_t i = 0; i < num_docs; ++i) {
        index.pids_.push_back(get_str());
        index.lengths_.push_back(static_cast<std::uint32_t>(get_u64()));
        total_len += index.lengths_.back();
    }
    index.avg_length_ = num_docs == 0 ? 0.0 : static_cast<double>(total_len) / static_cast<double>(num_docs);

    const auto num_terms = get_u64();
    for (std::uint64_t i = 0; i < num_terms; ++i) {
        auto term = get_str();
        auto& plist = index.postings_[std::move(term)];
        plist.resize(get_u64());
        for (auto& posting: plist) {
            posting.doc = static_cast<std::uint32_t>(get_u64());
            posting.tf = static_cast<std::uint32_t>(get_u64());
        }
    }
    index.rebuild_forward();
    return index;
}

}  // namespace miir

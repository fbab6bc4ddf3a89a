#include "miir/corpus.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "miir/common.hpp"

namespace miir {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

// Parses `id<TAB>text` lines. Exactly one tab per line; text may be anything
// tab-free. Yields (id, text, line_number).
template <typename Fn>
void for_each_tsv_record(const std::string& path, Fn&& fn) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto first = line.find('\t');
        if (first == std::string::npos || line.find('\t', first + 1) != std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected exactly 2 tab-separated columns");
        }
        fn(line.substr(0, first), line.substr(first + 1), lineno);
    }
}

void check_disjoint(const Qrels& qrels, const std::string& path) {
    for (const auto& [qid, j]: qrels.by_query) {
        for (const auto& pid: j.positives) {
            if (j.negatives.contains(pid)) {
                throw IntegrityError(path + ": passage " + pid + " judged both relevant and irrelevant for query " + qid);
            }
        }
    }
}

}  // namespace

const Judgment& Qrels::at(const std::string& qid) const {
    auto it = by_query.find(qid);
    if (it == by_query.end()) throw DomainError("query " + qid + " absent from qrels");
    return it->second;
}

std::map<std::string, Passage> load_passages(const std::string& path) {
    std::map<std::string, Passage> out;
    for_each_tsv_record(path, [&](std::string id, std::string text, std::size_t lineno) {
        if (blank(text)) throw ParseError(path + ":" + std::to_string(lineno) + ": empty passage text");
        auto [it, inserted] = out.emplace(id, Passage{id, std::move(text)});
        if (!inserted) throw IntegrityError(path + ":" + std::to_string(lineno) + ": duplicate passage id " + id);
    });
    return out;
}

std::map<std::string, Query> load_queries(const std::string& path) {
    std::map<std::string, Query> out;
    for_each_tsv_record(path, [&](std::string id, std::string text, std::size_t lineno) {
        if (blank(text)) throw ParseError(path + ":" + std::to_string(lineno) + ": empty query text");
        auto [it, inserted] = out.emplace(id, Query{id, std::move(text)});
        if (!inserted) throw IntegrityError(path + ":" + std::to_string(lineno) + ": duplicate query id " + id);
    });
    return out;
}

namespace {

using AdmitFn = std::function<bool(const std::string&, const std::string&, std::size_t)>;

Qrels load_qrels_impl(const std::string& path, QrelsFormat format, const AdmitFn& admit);

}  // namespace

Qrels load_qrels(const std::string& path, QrelsFormat format, const Collection& collection,
                 bool lenient, std::size_t* dropped) {
    std::size_t drop_count = 0;
    auto admit = [&](const std::string& qid, const std::string& pid, std::size_t lineno) -> bool {
        if (collection.queries.contains(qid) && collection.passages.contains(pid)) return true;
        if (!lenient) {
            throw IntegrityError(path + ":" + std::to_string(lineno) + ": qrels reference unknown id (qid=" + qid +
                                 ", pid=" + pid + ")");
        }
        ++drop_count;
        return false;
    };
    auto qrels = load_qrels_impl(path, format, admit);
    if (dropped != nullptr) *dropped = drop_count;
    return qrels;
}

Qrels load_qrels_standalone(const std::string& path, QrelsFormat format) {
    return load_qrels_impl(path, format, [](const std::string&, const std::string&, std::size_t) { return true; });
}

namespace {

Qrels load_qrels_impl(const std::string& path, QrelsFormat format, const AdmitFn& admit) {
    Qrels qrels;
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;

    if (format == QrelsFormat::trec_qrels) {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (blank(line)) continue;
            std::istringstream ss(line);
            std::string qid, iter, pid, rel;
            if (!(ss >> qid >> iter >> pid >> rel)) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": expected `qid 0 pid rel`");
            }
            std::string extra;
            if (ss >> extra) throw ParseError(path + ":" + std::to_string(lineno) + ": trailing fields");
            if (rel != "0" && rel != "1") {
                throw ParseError(path + ":" + std::to_string(lineno) + ": relevance must be 0 or 1, got " + rel);
            }
            if (!admit(qid, pid, lineno)) continue;
            auto& j = qrels.by_query[qid];
            (rel == "1" ? j.positives : j.negatives).insert(pid);
        }
    } else {
        while (std::getline(in, line)) {
            ++lineno;
            if (blank(line)) continue;
            nlohmann::json rec;
            try {
                rec = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
            if (!rec.contains("qid") || !rec.contains("pos") || !rec.contains("neg")) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": record needs qid/pos/neg");
            }
            const auto qid = rec.at("qid").get<std::string>();
            auto& j = qrels.by_query[qid];
            for (const auto& pid: rec.at("pos")) {
                if (admit(qid, pid.get<std::string>(), lineno)) j.positives.insert(pid.get<std::string>());
            }
            for (const auto& pid: rec.at("neg")) {
                if (admit(qid, pid.get<std::string>(), lineno)) j.negatives.insert(pid.get<std::string>());
            }
            if (j.positives.empty() && j.negatives.empty()) qrels.by_query.erase(qid);
        }
    }

    check_disjoint(qrels, path);
    return qrels;
}

template <typename Map>
void write_tsv(const std::string& path, const Map& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [id, rec]: records) out << id << '\t' << rec.text << '\n';
}

}  // namespace

void write_passages(const std::string& path, const std::map<std::string, Passage>& passages) {
    write_tsv(path, passages);
}

void write_queries(const std::string& path, const std::map<std::string, Query>& queries) {
    write_tsv(path, queries);
}

}  // namespace miir

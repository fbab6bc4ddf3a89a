#include "miir/ranking.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "miir/common.hpp"

namespace miir {

void Ranking::validate() const {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!seen.insert(items[i].pid).second) {
            throw IntegrityError("ranking for " + query_id + " repeats passage " + items[i].pid);
        }
        if (i > 0 && items[i].score > items[i - 1].score) {
            throw IntegrityError("ranking for " + query_id + " has increasing scores at rank " + std::to_string(i + 1));
        }
    }
}

std::vector<std::string> Ranking::ids() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& item: items) out.push_back(item.pid);
    return out;
}

std::string format_trec_run(const std::vector<Ranking>& rankings) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto& ranking: rankings) {
        for (std::size_t i = 0; i < ranking.items.size(); ++i) {
            out << ranking.query_id << " Q0 " << ranking.items[i].pid << ' ' << (i + 1) << ' '
                << ranking.items[i].score << ' ' << (ranking.tag.empty() ? "run" : ranking.tag) << '\n';
        }
    }
    return out.str();
}

void write_trec_run(const std::string& path, const std::vector<Ranking>& rankings) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << format_trec_run(rankings);
}

std::map<std::string, Ranking> read_trec_run(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    struct Row {
        long rank;
        std::string pid;
        double score;
    };
    std::map<std::string, std::vector<Row>> rows;
    std::map<std::string, std::string> tags;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ss(line);
        std::string qid, q0, pid, tag;
        long rank = 0;
        double score = 0.0;
        if (!(ss >> qid >> q0 >> pid >> rank >> score >> tag)) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected `qid Q0 pid rank score tag`");
        }
        rows[qid].push_back({rank, pid, score});
        tags[qid] = tag;
    }

    std::map<std::string, Ranking> out;
    for (auto& [qid, qrows]: rows) {
        std::stable_sort(qrows.begin(), qrows.end(), [](const Row& a, const Row& b) { return a.rank < b.rank; });
        Ranking r{qid, tags[qid], {}};
        r.items.reserve(qrows.size());
        for (auto& row: qrows) r.items.push_back({std::move(row.pid), row.score});
        r.validate();
        out.emplace(qid, std::move(r));
    }
    return out;
}

}  // namespace miir

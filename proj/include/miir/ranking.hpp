#pragma once

#include <map>
#include <string>
#include <vector>

namespace miir {

struct ScoredPassage {
    std::string pid;
    double score = 0.0;
    bool operator==(const ScoredPassage&) const = default;
};

/// An ordered result list for one query. `tag` records the producing stage
/// ("bm25", "rm3", "rerank:t=2", ...). Scores are non-increasing and passage
/// ids unique; validate() enforces both.
struct Ranking {
    std::string query_id;
    std::string tag;
    std::vector<ScoredPassage> items;

    bool empty() const { return items.empty(); }
    std::size_t size() const { return items.size(); }
    void validate() const;

    /// Passage ids in rank order.
    std::vector<std::string> ids() const;
};

/// TREC run format: `qid Q0 pid rank score tag`, scores with 6 decimals.
void write_trec_run(const std::string& path, const std::vector<Ranking>& rankings);
std::string format_trec_run(const std::vector<Ranking>& rankings);

/// Reads a run file back into per-query rankings, keyed by query id, ordered
/// by the file's rank column.
std::map<std::string, Ranking> read_trec_run(const std::string& path);

}  // namespace miir

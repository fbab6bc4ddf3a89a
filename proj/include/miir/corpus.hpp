#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace miir {

struct Passage {
    std::string id;
    std::string text;
    bool operator==(const Passage&) const = default;
};

struct Query {
    std::string id;
    std::string text;
    bool operator==(const Query&) const = default;
};

/// Per-query relevance judgments: disjoint positive / negative passage id sets.
struct Judgment {
    std::set<std::string> positives;
    std::set<std::string> negatives;
    bool operator==(const Judgment&) const = default;
};

struct Qrels {
    std::map<std::string, Judgment> by_query;

    bool has(const std::string& qid) const { return by_query.contains(qid); }
    const Judgment& at(const std::string& qid) const;
    bool operator==(const Qrels&) const = default;
};

struct Collection {
    std::map<std::string, Passage> passages;
    std::map<std::string, Query> queries;
    Qrels qrels;
};

enum class QrelsFormat { trec_qrels, hardneg_jsonl };

std::map<std::string, Passage> load_passages(const std::string& path);
std::map<std::string, Query> load_queries(const std::string& path);

/// Loads judgments and checks them against the collection's id spaces.
/// Unknown ids are a hard error unless `lenient`, which drops them and counts
/// the drops in *dropped. P+/P- overlap is always an error.
Qrels load_qrels(const std::string& path, QrelsFormat format, const Collection& collection,
                 bool lenient = false, std::size_t* dropped = nullptr);

/// Loads judgments without referential checks (for evaluating run files when
/// no collection is on hand). Disjointness is still enforced.
Qrels load_qrels_standalone(const std::string& path, QrelsFormat format);

void write_passages(const std::string& path, const std::map<std::string, Passage>& passages);
void write_queries(const std::string& path, const std::map<std::string, Query>& queries);

}  // namespace miir

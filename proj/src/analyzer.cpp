#include "miir/analyzer.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace miir {

namespace {

// Classic Lucene English stopword list.
const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> kSet = {
        "a",    "an",   "and",  "are",   "as",    "at",   "be",    "but",  "by",
        "for",  "if",   "in",   "into",  "is",    "it",   "no",    "not",  "of",
        "on",   "or",   "such", "that",  "the",   "their", "then", "there", "these",
        "they", "this", "to",   "was",   "will",  "with",
    };
    return kSet;
}

inline bool token_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

bool Analyzer::is_stopword(std::string_view token) {
    return stopwords().contains(token);
}

std::vector<std::string> Analyzer::tokenize(std::string_view text) const {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= opts_.min_token_len && !(opts_.remove_stopwords && is_stopword(cur))) {
            out.push_back(cur);
        }
        cur.clear();
    };
    for (unsigned char c: text) {
        if (token_char(c)) {
            cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

}  // namespace miir

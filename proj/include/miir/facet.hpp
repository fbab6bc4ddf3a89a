#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "miir/corpus.hpp"
#include "miir/embed.hpp"

namespace miir {

enum class Polarity { positive, negative };

std::string to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

/// K keywords characterizing one aspect of a passage, ordered by descending
/// similarity to the passage embedding. `is_short` marks facets built from
/// passages with fewer than k candidate tokens.
struct Facet {
    std::vector<std::string> words;
    std::optional<Polarity> polarity;
    std::string source_passage_id;
    std::string query_id;
    bool is_short = false;

    /// Space-joined words in salience order, the form injected into prompts.
    std::string joined() const;

    /// Inspection dump format: {"qid","pid","polarity","words":[...]}.
    nlohmann::json to_json() const;
    static Facet from_json(const nlohmann::json& j);
};

/// Candidate tokens for facet extraction: case-folded alphanumeric tokens of
/// length >= 3, stopwords removed, deduplicated.
std::vector<std::string> facet_candidates(const std::string& text);

/// The k candidate tokens most similar to the passage embedding, descending
/// similarity, ties broken by ascending token. Polarity is left unset.
Facet extract_facet(const Passage& passage, const EmbeddingProvider& provider, std::size_t k);

struct FacetSets {
    std::vector<Facet> positives;
    std::vector<Facet> negatives;
    std::size_t skipped = 0;  // passages that failed extraction
};

/// One facet per judged passage of the query; positives from P+, negatives
/// from P-, each in ascending passage-id order. Extraction failures are
/// skipped and counted.
FacetSets build_facet_sets(const Query& query, const Qrels& qrels,
                           const std::map<std::string, Passage>& passages, const EmbeddingProvider& provider,
                           std::size_t k);

}  // namespace miir

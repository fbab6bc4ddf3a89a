#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace miir {

struct AnalyzerOptions {
    std::size_t min_token_len = 2;
    bool remove_stopwords = true;
};

/// Lowercasing word tokenizer: splits on non-alphanumeric bytes, drops short
/// tokens, optionally filters a fixed English stopword list. Bytes >= 0x80 are
/// kept as token characters so multi-byte UTF-8 words survive intact.
class Analyzer {
  public:
    explicit Analyzer(AnalyzerOptions opts = {}): opts_(opts) {}

    std::vector<std::string> tokenize(std::string_view text) const;
    const AnalyzerOptions& options() const { return opts_; }

    static bool is_stopword(std::string_view token);

  private:
    AnalyzerOptions opts_;
};

}  // namespace miir

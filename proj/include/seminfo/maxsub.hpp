#ifndef SEMINFO_MAXSUB_HPP
#define SEMINFO_MAXSUB_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "seminfo/textnorm.hpp"
#include "seminfo/tree.hpp"

namespace seminfo {

// Substrings are keyed by token content (string types, not positions).
using TokenString = std::vector<std::string>;

struct ParaphraseSet {
  std::string id;
  NormalizedSentence source;
  std::vector<NormalizedSentence> paraphrases;
};

// counts[s] = number of paraphrases for which s is a maximal substring
// shared with the source.
using FrequencyTable = std::map<TokenString, std::uint32_t>;

// Per source sentence: raw document frequency of each substring s of the
// source, df(s, x) = |{x' in corpus : s in MS(x, x')}|, with x itself
// included in the corpus (it contributes only to s = x).
struct DfIndex {
  std::map<std::string, std::map<TokenString, std::uint32_t>> by_id;
  std::size_t corpus_size = 0;
};

struct ScoreOptions {
  bool log_tf = true;  // tf(F) = 1 + ln F; raw F when false
};

// Non-negative tf-idf scores for the source's spans with 2 <= j-i <= n-1
// (whole-sentence and single-token spans are constant across bracketings and
// are omitted). Absent spans read as 0.
struct SpanScoreTable {
  std::string id;
  std::uint32_t n = 0;
  std::map<Span, double> scores;
};

// All non-empty token strings occurring in both a and b.
std::set<TokenString> common_substrings(const TokenString& a,
                                        const TokenString& b);

// Common substrings of a and b contained in no strictly larger common
// substring (an anti-chain under the substring partial order).
std::set<TokenString> maximal_substrings(const TokenString& a,
                                         const TokenString& b);

FrequencyTable maximal_frequency(const ParaphraseSet& ps);

DfIndex build_df_index(
    const std::vector<std::pair<std::string, TokenString>>& corpus);
DfIndex build_df_index(const std::vector<ParaphraseSet>& corpus);

// Throws std::invalid_argument if the df index has no entry for ps.id.
SpanScoreTable span_seminfo_table(const ParaphraseSet& ps, const DfIndex& df,
                                  const ScoreOptions& opts = {});

}  // namespace seminfo

#endif  // SEMINFO_MAXSUB_HPP

#include "seminfo/maxsub.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seminfo {

namespace {

bool contains_substring(const TokenString& big, const TokenString& small) {
  if (small.size() > big.size()) return false;
  for (std::size_t i = 0; i + small.size() <= big.size(); ++i) {
    if (std::equal(small.begin(), small.end(), big.begin() + i)) return true;
  }
  return false;
}

// Removes every element strictly contained in a larger element.
std::set<TokenString> antichain_filter(const std::set<TokenString>& types) {
  std::set<TokenString> out;
  for (const TokenString& s : types) {
    bool dominated = false;
    for (const TokenString& t : types) {
      if (t.size() > s.size() && contains_substring(t, s)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.insert(s);
  }
  return out;
}

}  // namespace

std::set<TokenString> common_substrings(const TokenString& a,
                                        const TokenString& b) {
  std::set<TokenString> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j <= a.size(); ++j) {
      TokenString s(a.begin() + i, a.begin() + j);
      if (contains_substring(b, s)) out.insert(std::move(s));
    }
  }
  return out;
}

std::set<TokenString> maximal_substrings(const TokenString& a,
                                         const TokenString& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::set<TokenString> runs;
  if (n == 0 || m == 0) return runs;

  // Match-matrix diagonal runs: L[j] = length of the common suffix of
  // a[..i) and b[..j). A run that cannot be extended forward on its diagonal
  // is a full run; every common substring is contained in one, so the full
  // runs dominate all common substring types.
  std::vector<std::uint32_t> prev(m + 1, 0);
  std::vector<std::uint32_t> cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
        if (i == n || j == m || a[i] != b[j]) {
          runs.insert(TokenString(a.begin() + (i - cur[j]), a.begin() + i));
        }
      } else {
        cur[j] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return antichain_filter(runs);
}

FrequencyTable maximal_frequency(const ParaphraseSet& ps) {
  FrequencyTable out;
  const TokenString& src = ps.source.normalized_tokens;
  if (src.empty()) return out;
  for (const NormalizedSentence& p : ps.paraphrases) {
    for (const TokenString& s : maximal_substrings(src, p.normalized_tokens)) {
      ++out[s];
    }
  }
  return out;
}

DfIndex build_df_index(
    const std::vector<std::pair<std::string, TokenString>>& corpus) {
  if (corpus.empty()) {
    throw std::invalid_argument("build_df_index: empty corpus");
  }
  DfIndex out;
  out.corpus_size = corpus.size();
  for (const auto& [id, x] : corpus) {
    auto& counts = out.by_id[id];
    for (const auto& [other_id, y] : corpus) {
      (void)other_id;
      for (const TokenString& s : maximal_substrings(x, y)) ++counts[s];
    }
  }
  return out;
}

DfIndex build_df_index(const std::vector<ParaphraseSet>& corpus) {
  std::vector<std::pair<std::string, TokenString>> keyed;
  keyed.reserve(corpus.size());
  for (const ParaphraseSet& ps : corpus) {
    keyed.emplace_back(ps.id, ps.source.normalized_tokens);
  }
  return build_df_index(keyed);
}

SpanScoreTable span_seminfo_table(const ParaphraseSet& ps, const DfIndex& df,
                                  const ScoreOptions& opts) {
  const auto it = df.by_id.find(ps.id);
  if (it == df.by_id.end()) {
    throw std::invalid_argument("span_seminfo_table: df index has no entry '" +
                                ps.id + "'");
  }
  const TokenString& src = ps.source.normalized_tokens;
  const auto n = static_cast<std::uint32_t>(src.size());

  SpanScoreTable table;
  table.id = ps.id;
  table.n = n;
  if (n < 3) return table;  // no spans with 2 <= j-i <= n-1

  const FrequencyTable freq = maximal_frequency(ps);
  for (std::uint32_t i = 0; i + 2 <= n; ++i) {
    for (std::uint32_t j = i + 2; j <= n && j - i <= n - 1; ++j) {
      const TokenString s(src.begin() + i, src.begin() + j);
      const auto fit = freq.find(s);
      if (fit == freq.end() || fit->second == 0) continue;
      const double tf =
          opts.log_tf ? 1.0 + std::log(static_cast<double>(fit->second))
                      : static_cast<double>(fit->second);
      const auto dit = it->second.find(s);
      const double raw_df = dit == it->second.end() ? 0.0 : dit->second;
      const double idf = std::max(
          0.0, std::log(static_cast<double>(df.corpus_size) / (raw_df + 1.0)));
      const double score = tf * idf;
      if (score > 0.0) table.scores[Span{i, j}] = score;
    }
  }
  return table;
}

}  // namespace seminfo

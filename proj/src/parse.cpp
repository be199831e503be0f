#include "seminfo/parse.hpp"

#include <algorithm>
#include <stdexcept>

#include "seminfo/treecrf.hpp"

namespace seminfo {

ConstituentTree parse_mtd(const SpanScoreTable& scores) {
  SpanPotentialTable phi;
  phi.n = scores.n;
  phi.phi = scores.scores;
  return crf_viterbi(phi);
}

ConstituentTree parse_mbr(const Grammar& grammar,
                          const std::vector<int>& sentence) {
  const PosteriorTable post = span_posteriors(grammar, sentence);
  if (sentence.size() == 1) {
    ConstituentTree t;
    t.n = 1;
    t.spans = {Span{0, 1}};
    return t;
  }
  SpanPotentialTable phi;
  phi.n = static_cast<std::uint32_t>(sentence.size());
  phi.phi = post;
  return crf_viterbi(phi);
}

ConstituentTree parse_baseline(std::uint32_t n, BaselineKind kind,
                               std::mt19937_64* rng) {
  if (n == 0) throw std::invalid_argument("parse_baseline: n must be positive");
  if (kind == BaselineKind::kRandom) {
    if (rng == nullptr)
      throw std::invalid_argument("parse_baseline: random baseline needs rng");
    SpanPotentialTable flat;
    flat.n = n;
    return crf_sample(flat, *rng, 1)[0];
  }
  ConstituentTree t;
  t.n = n;
  for (std::uint32_t i = 0; i < n; ++i) t.spans.push_back({i, i + 1});
  for (std::uint32_t len = 2; len <= n; ++len) {
    if (kind == BaselineKind::kLeft)
      t.spans.push_back({0, len});
    else
      t.spans.push_back({n - len, n});
  }
  std::sort(t.spans.begin(), t.spans.end());
  return t;
}

}  // namespace seminfo

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracles {

using seminfo::ConstituentTree;
using seminfo::Span;

namespace {

// Span sets (length>=1, including (i,j) itself) of every binary tree over [i,j).
std::vector<std::vector<Span>> subtrees(std::uint32_t i, std::uint32_t j) {
  std::vector<std::vector<Span>> out;
  if (j - i == 1) {
    out.push_back({Span{i, j}});
    return out;
  }
  for (std::uint32_t k = i + 1; k < j; ++k) {
    const auto lefts = subtrees(i, k);
    const auto rights = subtrees(k, j);
    for (const auto& l : lefts) {
      for (const auto& r : rights) {
        std::vector<Span> spans{Span{i, j}};
        spans.insert(spans.end(), l.begin(), l.end());
        spans.insert(spans.end(), r.begin(), r.end());
        out.push_back(std::move(spans));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ConstituentTree> all_binary_trees(std::uint32_t n) {
  std::vector<ConstituentTree> out;
  for (auto& spans : subtrees(0, n)) {
    ConstituentTree t;
    t.n = n;
    std::sort(spans.begin(), spans.end());
    t.spans = std::move(spans);
    out.push_back(std::move(t));
  }
  return out;
}

double catalan(std::uint32_t k) {
  double c = 1.0;
  for (std::uint32_t m = 0; m < k; ++m) c = c * 2 * (2 * m + 1) / (m + 2);
  return c;
}

namespace {

std::set<seminfo::TokenString> all_substrings(const seminfo::TokenString& a) {
  std::set<seminfo::TokenString> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j <= a.size(); ++j) {
      out.insert(seminfo::TokenString(a.begin() + i, a.begin() + j));
    }
  }
  return out;
}

}  // namespace

std::set<seminfo::TokenString> brute_common_substrings(
    const seminfo::TokenString& a, const seminfo::TokenString& b) {
  const auto sa = all_substrings(a);
  const auto sb = all_substrings(b);
  std::set<seminfo::TokenString> out;
  for (const auto& s : sa) {
    if (sb.count(s)) out.insert(s);
  }
  return out;
}

std::set<seminfo::TokenString> brute_maximal_substrings(
    const seminfo::TokenString& a, const seminfo::TokenString& b) {
  const auto common = brute_common_substrings(a, b);
  std::set<seminfo::TokenString> out;
  for (const auto& s : common) {
    bool dominated = false;
    for (const auto& t : common) {
      if (t.size() <= s.size()) continue;
      for (std::size_t i = 0; !dominated && i + s.size() <= t.size(); ++i) {
        dominated = std::equal(s.begin(), s.end(), t.begin() + i);
      }
      if (dominated) break;
    }
    if (!dominated) out.insert(s);
  }
  return out;
}

namespace {

// Independent per-LHS softmax, in plain probability space.
struct RuleProbs {
  int nt = 0;
  int v = 0;
  std::vector<double> binary;
  std::vector<double> lexical;
};

RuleProbs rule_probs(const seminfo::Grammar& g) {
  RuleProbs p;
  p.nt = g.num_nonterminals;
  p.v = g.vocab_size();
  p.binary.resize(g.binary_logits.size());
  p.lexical.resize(g.lexical_logits.size());
  for (int a = 0; a < p.nt; ++a) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < p.nt * p.nt; ++r)
      mx = std::max(mx, g.binary_logits[a * p.nt * p.nt + r]);
    for (int w = 0; w < p.v; ++w)
      mx = std::max(mx, g.lexical_logits[a * p.v + w]);
    double sum = 0;
    for (int r = 0; r < p.nt * p.nt; ++r)
      sum += std::exp(g.binary_logits[a * p.nt * p.nt + r] - mx);
    for (int w = 0; w < p.v; ++w)
      sum += std::exp(g.lexical_logits[a * p.v + w] - mx);
    for (int r = 0; r < p.nt * p.nt; ++r)
      p.binary[a * p.nt * p.nt + r] =
          std::exp(g.binary_logits[a * p.nt * p.nt + r] - mx) / sum;
    for (int w = 0; w < p.v; ++w)
      p.lexical[a * p.v + w] =
          std::exp(g.lexical_logits[a * p.v + w] - mx) / sum;
  }
  return p;
}

std::uint32_t split_of(const std::vector<Span>& spans, Span s) {
  for (std::uint32_t k = s.i + 1; k < s.j; ++k) {
    if (std::binary_search(spans.begin(), spans.end(), Span{s.i, k}) &&
        std::binary_search(spans.begin(), spans.end(), Span{k, s.j})) {
      return k;
    }
  }
  return 0;  // unreachable for valid trees
}

std::vector<Span> by_length(const std::vector<Span>& spans) {
  std::vector<Span> order = spans;
  std::stable_sort(order.begin(), order.end(),
                   [](const Span& a, const Span& b) {
                     return a.j - a.i < b.j - b.i;
                   });
  return order;
}

// All labeled derivations of the subtree of `spans` rooted at (s, label a):
// (probability, rule uses) with rules tagged lexical/binary by index.
struct LabeledDerivation {
  double prob = 1;
  std::vector<std::pair<bool, std::size_t>> rules;  // (is_lexical, index)
};

std::vector<LabeledDerivation> labeled_derivations(
    const RuleProbs& p, const std::vector<Span>& spans,
    const std::vector<int>& sentence, Span s, int a) {
  std::vector<LabeledDerivation> out;
  if (s.j - s.i == 1) {
    const std::size_t idx = a * p.v + sentence[s.i];
    out.push_back({p.lexical[idx], {{true, idx}}});
    return out;
  }
  const std::uint32_t k = split_of(spans, s);
  std::vector<std::vector<LabeledDerivation>> left(p.nt), right(p.nt);
  for (int b = 0; b < p.nt; ++b) {
    left[b] = labeled_derivations(p, spans, sentence, {s.i, k}, b);
    right[b] = labeled_derivations(p, spans, sentence, {k, s.j}, b);
  }
  for (int b = 0; b < p.nt; ++b) {
    for (int c = 0; c < p.nt; ++c) {
      const std::size_t idx = (a * p.nt + b) * p.nt + c;
      for (const auto& l : left[b]) {
        for (const auto& r : right[c]) {
          LabeledDerivation d;
          d.prob = p.binary[idx] * l.prob * r.prob;
          d.rules.push_back({false, idx});
          d.rules.insert(d.rules.end(), l.rules.begin(), l.rules.end());
          d.rules.insert(d.rules.end(), r.rules.begin(), r.rules.end());
          out.push_back(std::move(d));
        }
      }
    }
  }
  return out;
}

}  // namespace

PcfgEnumeration enumerate_pcfg(const seminfo::Grammar& g,
                               const std::vector<int>& sentence) {
  const RuleProbs p = rule_probs(g);
  const auto n = static_cast<std::uint32_t>(sentence.size());
  PcfgEnumeration out;
  for (const auto& t : all_binary_trees(n)) {
    std::map<Span, std::vector<double>> sum, best;
    for (const Span& s : by_length(t.spans)) {
      auto& sv = sum[s];
      auto& bv = best[s];
      sv.assign(p.nt, 0);
      bv.assign(p.nt, 0);
      if (s.j - s.i == 1) {
        for (int a = 0; a < p.nt; ++a)
          sv[a] = bv[a] = p.lexical[a * p.v + sentence[s.i]];
        continue;
      }
      const std::uint32_t k = split_of(t.spans, s);
      const auto& sl = sum[{s.i, k}];
      const auto& sr = sum[{k, s.j}];
      const auto& bl = best[{s.i, k}];
      const auto& br = best[{k, s.j}];
      for (int a = 0; a < p.nt; ++a) {
        double acc = 0;
        double mx = 0;
        for (int b = 0; b < p.nt; ++b) {
          for (int c = 0; c < p.nt; ++c) {
            const double pr = p.binary[(a * p.nt + b) * p.nt + c];
            acc += pr * sl[b] * sr[c];
            mx = std::max(mx, pr * bl[b] * br[c]);
          }
        }
        sv[a] = acc;
        bv[a] = mx;
      }
    }
    const double mass = sum[{0, n}][g.start];
    out.z += mass;
    out.shape_mass[t.spans] = mass;
    const double mj = best[{0, n}][g.start];
    if (mj > out.max_joint) {
      out.max_joint = mj;
      out.argmax_spans = t.spans;
    }
  }
  return out;
}

PcfgCountsEnumeration enumerate_pcfg_counts(const seminfo::Grammar& g,
                                            const std::vector<int>& sentence) {
  const RuleProbs p = rule_probs(g);
  const auto n = static_cast<std::uint32_t>(sentence.size());
  PcfgCountsEnumeration out;
  out.binary.assign(p.binary.size(), 0);
  out.lexical.assign(p.lexical.size(), 0);
  for (const auto& t : all_binary_trees(n)) {
    for (const auto& d :
         labeled_derivations(p, t.spans, sentence, {0, n}, g.start)) {
      out.z += d.prob;
      for (const auto& [is_lexical, idx] : d.rules)
        (is_lexical ? out.lexical : out.binary)[idx] += d.prob;
    }
  }
  for (double& x : out.binary) x /= out.z;
  for (double& x : out.lexical) x /= out.z;
  return out;
}

CrfEnumeration enumerate_crf(const seminfo::SpanPotentialTable& phi) {
  CrfEnumeration out;
  out.best_score = -std::numeric_limits<double>::infinity();
  for (const auto& t : all_binary_trees(phi.n)) {
    double score = 0;
    for (const Span& s : t.spans)
      if (s.j - s.i >= 2) score += phi.at(s);
    const double w = std::exp(score);
    out.z += w;
    out.tree_weight[t.spans] = w;
    if (score > out.best_score) {
      out.best_score = score;
      out.argmax_spans = t.spans;
    }
  }
  for (const auto& [spans, w] : out.tree_weight) {
    const double p = w / out.z;
    if (p > 0) out.entropy -= p * std::log(p);
    for (const Span& s : spans)
      if (s.j - s.i >= 2) out.marginals[s] += p;
  }
  if (phi.n == 1) out.marginals[Span{0, 1}] = 1.0;
  return out;
}

}  // namespace oracles

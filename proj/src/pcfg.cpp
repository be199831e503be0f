#include "seminfo/pcfg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "seminfo/rng.hpp"

namespace seminfo {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Per-LHS log probabilities: softmax over the concatenated binary and
// lexical rows of each LHS, in log space.
struct LogProbs {
  std::vector<double> binary;
  std::vector<double> lexical;
};

LogProbs log_probs(const Grammar& g) {
  const int nt = g.num_nonterminals;
  const int v = g.vocab_size();
  LogProbs lp{g.binary_logits, g.lexical_logits};
  for (int a = 0; a < nt; ++a) {
    double* brow = lp.binary.data() + static_cast<std::size_t>(a) * nt * nt;
    double* lrow = lp.lexical.data() + static_cast<std::size_t>(a) * v;
    double mx = kNegInf;
    for (int r = 0; r < nt * nt; ++r) mx = std::max(mx, brow[r]);
    for (int w = 0; w < v; ++w) mx = std::max(mx, lrow[w]);
    double sum = 0;
    for (int r = 0; r < nt * nt; ++r) sum += std::exp(brow[r] - mx);
    for (int w = 0; w < v; ++w) sum += std::exp(lrow[w] - mx);
    const double lse = mx + std::log(sum);
    for (int r = 0; r < nt * nt; ++r) brow[r] -= lse;
    for (int w = 0; w < v; ++w) lrow[w] -= lse;
  }
  return lp;
}

void check_sentence(const Grammar& g, const std::vector<int>& sentence,
                    const char* who) {
  if (sentence.empty())
    throw std::invalid_argument(std::string(who) + ": empty sentence");
  for (int w : sentence)
    if (w < 0 || w >= g.vocab_size())
      throw std::invalid_argument(std::string(who) + ": token index out of range");
}

// The unique split k of a length>=2 span within a full binary bracketing.
int find_split(const std::vector<Span>& spans, const Span& s) {
  for (std::uint32_t k = s.i + 1; k < s.j; ++k)
    if (std::binary_search(spans.begin(), spans.end(), Span{s.i, k}) &&
        std::binary_search(spans.begin(), spans.end(), Span{k, s.j}))
      return static_cast<int>(k);
  throw std::invalid_argument("tree_log_joint: span has no split");
}

}  // namespace

int Grammar::token_index(const std::string& word) const {
  auto it = terminal_vocab.find(word);
  if (it != terminal_vocab.end()) return it->second;
  return terminal_vocab.at(kUnkToken);
}

std::vector<int> Grammar::map_tokens(
    const std::vector<std::string>& words) const {
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(token_index(w));
  return out;
}

Grammar random_grammar(int num_nonterminals,
                       const std::vector<std::string>& terminals,
                       double init_scale, std::uint64_t seed) {
  if (num_nonterminals <= 0)
    throw std::invalid_argument("random_grammar: need a nonterminal");
  Grammar g;
  g.num_nonterminals = num_nonterminals;
  g.start = 0;
  g.terminal_vocab.emplace(kUnkToken, 0);
  for (const auto& w : terminals) {
    const int next = static_cast<int>(g.terminal_vocab.size());
    g.terminal_vocab.emplace(w, next);
  }
  std::mt19937_64 rng(seed);
  const std::size_t nt = num_nonterminals;
  g.binary_logits.resize(nt * nt * nt);
  for (double& x : g.binary_logits) x = init_scale * gaussian01(rng);
  g.lexical_logits.resize(nt * g.terminal_vocab.size());
  for (double& x : g.lexical_logits) x = init_scale * gaussian01(rng);
  return g;
}

Grammar normalize(const Grammar& g) {
  LogProbs lp = log_probs(g);
  Grammar out = g;
  out.binary_logits = std::move(lp.binary);
  out.lexical_logits = std::move(lp.lexical);
  return out;
}

InsideChart inside(const Grammar& g, const std::vector<int>& sentence) {
  check_sentence(g, sentence, "inside");
  const int n = static_cast<int>(sentence.size());
  const int nt = g.num_nonterminals;
  const LogProbs lp = log_probs(g);

  InsideChart c;
  c.n = n;
  c.num_nonterminals = nt;
  c.beta.assign(static_cast<std::size_t>(n + 1) * (n + 1) * nt, kNegInf);
  auto cell = [&](int i, int j) {
    return c.beta.data() + (static_cast<std::size_t>(i) * (n + 1) + j) * nt;
  };

  for (int i = 0; i < n; ++i) {
    double* b = cell(i, i + 1);
    for (int a = 0; a < nt; ++a)
      b[a] = lp.lexical[static_cast<std::size_t>(a) * g.vocab_size() +
                        sentence[i]];
  }

  // m(B,C) = logsumexp_k beta(i,k,B) + beta(k,j,C), then one more
  // logsumexp over (B,C) per LHS.
  std::vector<double> m(static_cast<std::size_t>(nt) * nt);
  for (int len = 2; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      std::fill(m.begin(), m.end(), kNegInf);
      for (int k = i + 1; k < j; ++k) {
        const double* left = cell(i, k);
        const double* right = cell(k, j);
        for (int b = 0; b < nt; ++b) {
          if (left[b] == kNegInf) continue;
          double* mrow = m.data() + static_cast<std::size_t>(b) * nt;
          for (int cc = 0; cc < nt; ++cc)
            mrow[cc] = logaddexp(mrow[cc], left[b] + right[cc]);
        }
      }
      double* out = cell(i, j);
      for (int a = 0; a < nt; ++a) {
        const double* row =
            lp.binary.data() + static_cast<std::size_t>(a) * nt * nt;
        double mx = kNegInf;
        for (int r = 0; r < nt * nt; ++r)
          mx = std::max(mx, row[r] + m[r]);
        if (mx == kNegInf) continue;
        double sum = 0;
        for (int r = 0; r < nt * nt; ++r) sum += std::exp(row[r] + m[r] - mx);
        out[a] = mx + std::log(sum);
      }
    }
  }
  c.log_z = c.beta_at(0, n, g.start);
  return c;
}

PosteriorTable span_posteriors(const Grammar& g,
                               const std::vector<int>& sentence) {
  ad::Tape tape;
  const TapePcfg tg = tape_grammar(tape, g);
  const TapeChart ch = tape_inside(tape, tg, sentence);
  if (!std::isfinite(tape.value(ch.log_z)))
    throw std::runtime_error("span_posteriors: unparsable sentence");

  const int n = ch.n;
  const int nt = ch.num_nonterminals;
  std::vector<Span> spans;
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j <= n; ++j)
      spans.push_back({static_cast<std::uint32_t>(i),
                       static_cast<std::uint32_t>(j)});
  if (n == 1) spans.push_back({0, 1});

  std::vector<ad::Var> wrt;
  wrt.reserve(spans.size() * nt);
  for (const Span& s : spans)
    for (int a = 0; a < nt; ++a)
      wrt.push_back(ch.beta_at(static_cast<int>(s.i),
                               static_cast<int>(s.j), a));
  const std::vector<ad::Var> adj = tape.gradient(ch.log_z, wrt);

  PosteriorTable table;
  std::size_t idx = 0;
  for (const Span& s : spans) {
    double p = 0;
    for (int a = 0; a < nt; ++a, ++idx)
      if (adj[idx] != ad::kNoVar) p += tape.value(adj[idx]);
    table[s] = p;
  }
  return table;
}

RuleCounts expected_rule_counts(const Grammar& g,
                                const std::vector<int>& sentence) {
  ad::Tape tape;
  const TapePcfg tg = tape_grammar(tape, g);
  const TapeChart ch = tape_inside(tape, tg, sentence);
  if (!std::isfinite(tape.value(ch.log_z)))
    throw std::runtime_error("expected_rule_counts: unparsable sentence");

  std::vector<ad::Var> wrt;
  wrt.reserve(2 * (tg.binary_lp.size() + tg.lexical_lp.size()));
  wrt.insert(wrt.end(), tg.binary_leaf.begin(), tg.binary_leaf.end());
  wrt.insert(wrt.end(), tg.lexical_leaf.begin(), tg.lexical_leaf.end());
  wrt.insert(wrt.end(), tg.binary_lp.begin(), tg.binary_lp.end());
  wrt.insert(wrt.end(), tg.lexical_lp.begin(), tg.lexical_lp.end());
  const std::vector<ad::Var> adj = tape.gradient(ch.log_z, wrt);
  auto val = [&](std::size_t q) {
    return adj[q] == ad::kNoVar ? 0.0 : tape.value(adj[q]);
  };

  RuleCounts out;
  const std::size_t nb = tg.binary_lp.size();
  const std::size_t nl = tg.lexical_lp.size();
  out.binary_grad.resize(nb);
  out.lexical_grad.resize(nl);
  out.binary.resize(nb);
  out.lexical.resize(nl);
  std::size_t q = 0;
  for (std::size_t r = 0; r < nb; ++r) out.binary_grad[r] = val(q++);
  for (std::size_t r = 0; r < nl; ++r) out.lexical_grad[r] = val(q++);
  for (std::size_t r = 0; r < nb; ++r) out.binary[r] = val(q++);
  for (std::size_t r = 0; r < nl; ++r) out.lexical[r] = val(q++);
  return out;
}

ConstituentTree sample_tree_posterior(const Grammar& g,
                                      const std::vector<int>& sentence,
                                      std::mt19937_64& rng) {
  const InsideChart c = inside(g, sentence);
  if (!std::isfinite(c.log_z))
    throw std::runtime_error("sample_tree_posterior: unparsable sentence");
  const LogProbs lp = log_probs(g);
  const int n = c.n;
  const int nt = c.num_nonterminals;

  ConstituentTree t;
  t.n = static_cast<std::uint32_t>(n);
  std::vector<std::array<int, 3>> stack{{0, n, g.start}};
  std::vector<double> w;
  while (!stack.empty()) {
    const auto [i, j, a] = stack.back();
    stack.pop_back();
    t.spans.push_back(
        {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    if (j - i == 1) continue;

    w.assign(static_cast<std::size_t>(j - i - 1) * nt * nt, 0.0);
    const double total = c.beta_at(i, j, a);
    const double* brow =
        lp.binary.data() + static_cast<std::size_t>(a) * nt * nt;
    std::size_t idx = 0;
    for (int k = i + 1; k < j; ++k)
      for (int b = 0; b < nt; ++b) {
        const double bl = c.beta_at(i, k, b);
        for (int cc = 0; cc < nt; ++cc, ++idx) {
          const double s = brow[b * nt + cc] + bl + c.beta_at(k, j, cc);
          w[idx] = s == kNegInf ? 0.0 : std::exp(s - total);
        }
      }
    const double u = uniform01(rng);
    std::size_t pick = w.size() - 1;
    double cum = 0;
    for (std::size_t q = 0; q < w.size(); ++q) {
      cum += w[q];
      if (u < cum) {
        pick = q;
        break;
      }
    }
    const int k = i + 1 + static_cast<int>(pick / (nt * nt));
    const int b = static_cast<int>(pick / nt % nt);
    const int cc = static_cast<int>(pick % nt);
    stack.push_back({i, k, b});
    stack.push_back({k, j, cc});
  }
  std::sort(t.spans.begin(), t.spans.end());
  return t;
}

ConstituentTree viterbi_tree(const Grammar& g,
                             const std::vector<int>& sentence) {
  check_sentence(g, sentence, "viterbi_tree");
  const int n = static_cast<int>(sentence.size());
  const int nt = g.num_nonterminals;
  const LogProbs lp = log_probs(g);

  const std::size_t cells = static_cast<std::size_t>(n + 1) * (n + 1) * nt;
  std::vector<double> v(cells, kNegInf);
  std::vector<std::array<int, 3>> back(cells, {-1, -1, -1});
  auto at = [&](int i, int j, int a) -> std::size_t {
    return (static_cast<std::size_t>(i) * (n + 1) + j) * nt + a;
  };

  for (int i = 0; i < n; ++i)
    for (int a = 0; a < nt; ++a)
      v[at(i, i + 1, a)] =
          lp.lexical[static_cast<std::size_t>(a) * g.vocab_size() +
                     sentence[i]];

  for (int len = 2; len <= n; ++len)
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      for (int a = 0; a < nt; ++a) {
        const double* brow =
            lp.binary.data() + static_cast<std::size_t>(a) * nt * nt;
        double best = kNegInf;
        std::array<int, 3> arg{-1, -1, -1};
        // k ascending with >= keeps the larger split on ties
        // (left-branching). The children are summed before the rule score so
        // that mirror-image splits of a symmetric chart compare bitwise
        // equal (IEEE addition commutes).
        for (int k = i + 1; k < j; ++k)
          for (int b = 0; b < nt; ++b) {
            const double vl = v[at(i, k, b)];
            if (vl == kNegInf) continue;
            for (int cc = 0; cc < nt; ++cc) {
              const double s = (vl + v[at(k, j, cc)]) + brow[b * nt + cc];
              if (s != kNegInf && s >= best) {
                best = s;
                arg = {k, b, cc};
              }
            }
          }
        v[at(i, j, a)] = best;
        back[at(i, j, a)] = arg;
      }
    }

  if (v[at(0, n, g.start)] == kNegInf)
    throw std::runtime_error("viterbi_tree: unparsable sentence");

  ConstituentTree t;
  t.n = static_cast<std::uint32_t>(n);
  std::vector<std::array<int, 3>> stack{{0, n, g.start}};
  while (!stack.empty()) {
    const auto [i, j, a] = stack.back();
    stack.pop_back();
    t.spans.push_back(
        {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    if (j - i == 1) continue;
    const auto [k, b, cc] = back[at(i, j, a)];
    stack.push_back({i, k, b});
    stack.push_back({k, j, cc});
  }
  std::sort(t.spans.begin(), t.spans.end());
  return t;
}

double tree_log_joint(const Grammar& g, const std::vector<int>& sentence,
                      const ConstituentTree& t) {
  check_sentence(g, sentence, "tree_log_joint");
  if (t.n != sentence.size() || !is_valid_tree(t))
    throw std::invalid_argument("tree_log_joint: invalid tree");
  const int nt = g.num_nonterminals;
  const LogProbs lp = log_probs(g);

  std::vector<Span> order = t.spans;
  std::stable_sort(order.begin(), order.end(),
                   [](const Span& a, const Span& b) {
                     return a.j - a.i < b.j - b.i;
                   });
  std::map<Span, std::vector<double>> val;
  for (const Span& s : order) {
    std::vector<double>& out = val[s];
    out.assign(nt, kNegInf);
    if (s.j - s.i == 1) {
      for (int a = 0; a < nt; ++a)
        out[a] = lp.lexical[static_cast<std::size_t>(a) * g.vocab_size() +
                            sentence[s.i]];
      continue;
    }
    const int k = find_split(t.spans, s);
    const std::vector<double>& L = val[{s.i, static_cast<std::uint32_t>(k)}];
    const std::vector<double>& R = val[{static_cast<std::uint32_t>(k), s.j}];
    for (int a = 0; a < nt; ++a) {
      const double* brow =
          lp.binary.data() + static_cast<std::size_t>(a) * nt * nt;
      double mx = kNegInf;
      for (int b = 0; b < nt; ++b)
        for (int cc = 0; cc < nt; ++cc)
          mx = std::max(mx, brow[b * nt + cc] + L[b] + R[cc]);
      if (mx == kNegInf) continue;
      double sum = 0;
      for (int b = 0; b < nt; ++b)
        for (int cc = 0; cc < nt; ++cc)
          sum += std::exp(brow[b * nt + cc] + L[b] + R[cc] - mx);
      out[a] = mx + std::log(sum);
    }
  }
  return val[{0, t.n}][g.start];
}

TapePcfg tape_grammar(ad::Tape& tape, const Grammar& g) {
  TapePcfg tg;
  tg.num_nonterminals = g.num_nonterminals;
  tg.vocab_size = g.vocab_size();
  tg.start = g.start;
  tg.binary_leaf.reserve(g.binary_logits.size());
  for (double x : g.binary_logits) tg.binary_leaf.push_back(tape.leaf(x));
  tg.lexical_leaf.reserve(g.lexical_logits.size());
  for (double x : g.lexical_logits) tg.lexical_leaf.push_back(tape.leaf(x));

  const int nt = tg.num_nonterminals;
  const int v = tg.vocab_size;
  tg.binary_lp.resize(tg.binary_leaf.size());
  tg.lexical_lp.resize(tg.lexical_leaf.size());
  std::vector<ad::Var> row;
  for (int a = 0; a < nt; ++a) {
    row.clear();
    for (int r = 0; r < nt * nt; ++r)
      row.push_back(tg.binary_leaf[static_cast<std::size_t>(a) * nt * nt + r]);
    for (int w = 0; w < v; ++w)
      row.push_back(tg.lexical_leaf[static_cast<std::size_t>(a) * v + w]);
    const ad::Var lse = tape.logsumexp(row);
    for (int r = 0; r < nt * nt; ++r) {
      const std::size_t q = static_cast<std::size_t>(a) * nt * nt + r;
      tg.binary_lp[q] = tape.sub(tg.binary_leaf[q], lse);
    }
    for (int w = 0; w < v; ++w) {
      const std::size_t q = static_cast<std::size_t>(a) * v + w;
      tg.lexical_lp[q] = tape.sub(tg.lexical_leaf[q], lse);
    }
  }
  return tg;
}

TapeChart tape_inside(ad::Tape& tape, const TapePcfg& g,
                      const std::vector<int>& sentence) {
  if (sentence.empty())
    throw std::invalid_argument("tape_inside: empty sentence");
  for (int w : sentence)
    if (w < 0 || w >= g.vocab_size)
      throw std::invalid_argument("tape_inside: token index out of range");
  const int n = static_cast<int>(sentence.size());
  const int nt = g.num_nonterminals;

  TapeChart ch;
  ch.n = n;
  ch.num_nonterminals = nt;
  ch.beta.assign(static_cast<std::size_t>(n + 1) * (n + 1) * nt, ad::kNoVar);
  auto set = [&](int i, int j, int a, ad::Var x) {
    ch.beta[(static_cast<std::size_t>(i) * (n + 1) + j) * nt + a] = x;
  };

  for (int i = 0; i < n; ++i)
    for (int a = 0; a < nt; ++a)
      set(i, i + 1, a, g.lexical_lp_at(a, sentence[i]));

  std::vector<ad::Var> m(static_cast<std::size_t>(nt) * nt);
  std::vector<ad::Var> terms;
  for (int len = 2; len <= n; ++len)
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      for (int b = 0; b < nt; ++b)
        for (int cc = 0; cc < nt; ++cc) {
          terms.clear();
          for (int k = i + 1; k < j; ++k)
            terms.push_back(
                tape.add(ch.beta_at(i, k, b), ch.beta_at(k, j, cc)));
          m[static_cast<std::size_t>(b) * nt + cc] = tape.logsumexp(terms);
        }
      for (int a = 0; a < nt; ++a) {
        terms.clear();
        for (int b = 0; b < nt; ++b)
          for (int cc = 0; cc < nt; ++cc)
            terms.push_back(
                tape.add(g.binary_lp_at(a, b, cc),
                         m[static_cast<std::size_t>(b) * nt + cc]));
        set(i, j, a, tape.logsumexp(terms));
      }
    }
  ch.log_z = ch.beta_at(0, n, g.start);
  return ch;
}

ad::Var tape_tree_log_joint(ad::Tape& tape, const TapePcfg& g,
                            const std::vector<int>& sentence,
                            const ConstituentTree& t) {
  if (sentence.empty() || t.n != sentence.size() || !is_valid_tree(t))
    throw std::invalid_argument("tape_tree_log_joint: invalid tree");
  const int nt = g.num_nonterminals;

  std::vector<Span> order = t.spans;
  std::stable_sort(order.begin(), order.end(),
                   [](const Span& a, const Span& b) {
                     return a.j - a.i < b.j - b.i;
                   });
  std::map<Span, std::vector<ad::Var>> val;
  std::vector<ad::Var> terms;
  for (const Span& s : order) {
    std::vector<ad::Var>& out = val[s];
    out.assign(nt, ad::kNoVar);
    if (s.j - s.i == 1) {
      for (int a = 0; a < nt; ++a)
        out[a] = g.lexical_lp_at(a, sentence[s.i]);
      continue;
    }
    const int k = find_split(t.spans, s);
    const std::vector<ad::Var>& L =
        val[{s.i, static_cast<std::uint32_t>(k)}];
    const std::vector<ad::Var>& R =
        val[{static_cast<std::uint32_t>(k), s.j}];
    for (int a = 0; a < nt; ++a) {
      terms.clear();
      for (int b = 0; b < nt; ++b)
        for (int cc = 0; cc < nt; ++cc)
          terms.push_back(
              tape.add(g.binary_lp_at(a, b, cc), tape.add(L[b], R[cc])));
      out[a] = tape.logsumexp(terms);
    }
  }
  return val[{0, t.n}][g.start];
}

}  // namespace seminfo

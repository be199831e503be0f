#include "seminfo/treecrf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "seminfo/rng.hpp"

namespace seminfo {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_table(const SpanPotentialTable& t, const char* who) {
  if (t.n == 0)
    throw std::invalid_argument(std::string(who) + ": n must be positive");
  for (const auto& [s, v] : t.phi) {
    if (s.j > t.n || s.j - s.i < 2 || !std::isfinite(v))
      throw std::invalid_argument(std::string(who) + ": bad span potential");
  }
}

// in(i,j) = phi(i,j) + logsumexp_k in(i,k) + in(k,j); in over units is 0.
std::vector<double> inside_scores(const SpanPotentialTable& t) {
  const int n = static_cast<int>(t.n);
  std::vector<double> in(static_cast<std::size_t>(n + 1) * (n + 1), kNegInf);
  auto ix = [&](int i, int j) {
    return static_cast<std::size_t>(i) * (n + 1) + j;
  };
  for (int i = 0; i < n; ++i) in[ix(i, i + 1)] = 0;
  for (int len = 2; len <= n; ++len)
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      double mx = kNegInf;
      for (int k = i + 1; k < j; ++k)
        mx = std::max(mx, in[ix(i, k)] + in[ix(k, j)]);
      double sum = 0;
      for (int k = i + 1; k < j; ++k)
        sum += std::exp(in[ix(i, k)] + in[ix(k, j)] - mx);
      in[ix(i, j)] = t.at({static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(j)}) +
                     mx + std::log(sum);
    }
  return in;
}

}  // namespace

double crf_partition(const SpanPotentialTable& phi) {
  check_table(phi, "crf_partition");
  return inside_scores(phi)[static_cast<std::size_t>(phi.n)];
}

ConstituentTree crf_viterbi(const SpanPotentialTable& phi) {
  check_table(phi, "crf_viterbi");
  const int n = static_cast<int>(phi.n);
  std::vector<double> best(static_cast<std::size_t>(n + 1) * (n + 1), 0);
  std::vector<int> split(best.size(), -1);
  auto ix = [&](int i, int j) {
    return static_cast<std::size_t>(i) * (n + 1) + j;
  };
  for (int len = 2; len <= n; ++len)
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      double mx = kNegInf;
      int arg = -1;
      // k ascending with >= keeps the larger split on ties (left-branching).
      for (int k = i + 1; k < j; ++k) {
        const double s = best[ix(i, k)] + best[ix(k, j)];
        if (s >= mx) {
          mx = s;
          arg = k;
        }
      }
      best[ix(i, j)] = phi.at({static_cast<std::uint32_t>(i),
                               static_cast<std::uint32_t>(j)}) +
                       mx;
      split[ix(i, j)] = arg;
    }

  ConstituentTree t;
  t.n = phi.n;
  std::vector<std::pair<int, int>> stack{{0, n}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    t.spans.push_back(
        {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    if (j - i == 1) continue;
    const int k = split[ix(i, j)];
    stack.push_back({i, k});
    stack.push_back({k, j});
  }
  std::sort(t.spans.begin(), t.spans.end());
  return t;
}

std::vector<ConstituentTree> crf_sample(const SpanPotentialTable& phi,
                                        std::mt19937_64& rng, int k) {
  check_table(phi, "crf_sample");
  if (k < 1) throw std::invalid_argument("crf_sample: k must be positive");
  const int n = static_cast<int>(phi.n);
  const std::vector<double> in = inside_scores(phi);
  auto ix = [&](int i, int j) {
    return static_cast<std::size_t>(i) * (n + 1) + j;
  };

  std::vector<ConstituentTree> out;
  out.reserve(k);
  std::vector<std::pair<int, int>> stack;
  for (int s = 0; s < k; ++s) {
    ConstituentTree t;
    t.n = phi.n;
    stack.assign(1, {0, n});
    while (!stack.empty()) {
      const auto [i, j] = stack.back();
      stack.pop_back();
      t.spans.push_back(
          {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      if (j - i == 1) continue;
      const double lse = in[ix(i, j)] -
                         phi.at({static_cast<std::uint32_t>(i),
                                 static_cast<std::uint32_t>(j)});
      const double u = uniform01(rng);
      double cum = 0;
      int pick = j - 1;
      for (int m = i + 1; m < j; ++m) {
        cum += std::exp(in[ix(i, m)] + in[ix(m, j)] - lse);
        if (u < cum) {
          pick = m;
          break;
        }
      }
      stack.push_back({i, pick});
      stack.push_back({pick, j});
    }
    std::sort(t.spans.begin(), t.spans.end());
    out.push_back(std::move(t));
  }
  return out;
}

double crf_entropy(const SpanPotentialTable& phi) {
  const double log_z = crf_partition(phi);
  double expected = 0;
  for (const auto& [s, mu] : crf_marginals(phi)) expected += mu * phi.at(s);
  return std::max(log_z - expected, 0.0);
}

std::map<Span, double> crf_marginals(const SpanPotentialTable& phi) {
  check_table(phi, "crf_marginals");
  const int n = static_cast<int>(phi.n);
  if (n == 1) return {{Span{0, 1}, 1.0}};

  ad::Tape tape;
  TapeCrf c = make_tape_crf(n);
  std::vector<Span> spans;
  std::vector<ad::Var> wrt;
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j <= n; ++j) {
      const Span s{static_cast<std::uint32_t>(i),
                   static_cast<std::uint32_t>(j)};
      const ad::Var leaf = tape.leaf(phi.at(s));
      c.set(i, j, leaf);
      spans.push_back(s);
      wrt.push_back(leaf);
    }
  const ad::Var log_z = tape_crf_partition(tape, c);
  const std::vector<ad::Var> adj = tape.gradient(log_z, wrt);

  std::map<Span, double> out;
  for (std::size_t q = 0; q < spans.size(); ++q)
    out[spans[q]] = adj[q] == ad::kNoVar ? 0.0 : tape.value(adj[q]);
  return out;
}

TapeCrf make_tape_crf(int n) {
  TapeCrf c;
  c.n = n;
  c.phi.assign(static_cast<std::size_t>(n + 1) * (n + 1), ad::kNoVar);
  return c;
}

ad::Var tape_crf_partition(ad::Tape& tape, const TapeCrf& c) {
  const int n = c.n;
  if (n <= 0)
    throw std::invalid_argument("tape_crf_partition: n must be positive");
  std::vector<ad::Var> in(static_cast<std::size_t>(n + 1) * (n + 1),
                          ad::kNoVar);
  auto ix = [&](int i, int j) {
    return static_cast<std::size_t>(i) * (n + 1) + j;
  };
  const ad::Var zero = tape.constant(0.0);
  for (int i = 0; i < n; ++i) in[ix(i, i + 1)] = zero;
  std::vector<ad::Var> terms;
  for (int len = 2; len <= n; ++len)
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      terms.clear();
      for (int k = i + 1; k < j; ++k)
        terms.push_back(tape.add(in[ix(i, k)], in[ix(k, j)]));
      const ad::Var lse = tape.logsumexp(terms);
      const ad::Var p = c.at(i, j);
      in[ix(i, j)] = p == ad::kNoVar ? lse : tape.add(p, lse);
    }
  return in[ix(0, n)];
}

ad::Var tape_crf_tree_log_prob(ad::Tape& tape, const TapeCrf& c,
                               ad::Var log_z, const ConstituentTree& t) {
  if (static_cast<int>(t.n) != c.n || !is_valid_tree(t))
    throw std::invalid_argument("tape_crf_tree_log_prob: invalid tree");
  std::vector<ad::Var> terms;
  for (const Span& s : internal_spans(t)) {
    const ad::Var p = c.at(static_cast<int>(s.i), static_cast<int>(s.j));
    if (p != ad::kNoVar) terms.push_back(p);
  }
  return tape.sub(tape.add_n(terms), log_z);
}

ad::Var tape_crf_entropy(ad::Tape& tape, const TapeCrf& c, ad::Var log_z) {
  std::vector<ad::Var> set_phi;
  for (const ad::Var p : c.phi)
    if (p != ad::kNoVar) set_phi.push_back(p);
  const std::vector<ad::Var> mu = tape.gradient(log_z, set_phi);
  std::vector<ad::Var> terms;
  for (std::size_t q = 0; q < set_phi.size(); ++q)
    if (mu[q] != ad::kNoVar)
      terms.push_back(tape.mul(mu[q], set_phi[q]));
  return tape.sub(log_z, tape.add_n(terms));
}

}  // namespace seminfo

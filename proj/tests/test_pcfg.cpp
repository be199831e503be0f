#include "seminfo/pcfg.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "seminfo/ad.hpp"
#include "seminfo/tree.hpp"

namespace ad = seminfo::ad;
using seminfo::ConstituentTree;
using seminfo::Grammar;
using seminfo::Span;

namespace {

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Single-nonterminal grammar with rules {S -> S S : p, S -> "a" : 1 - p};
// the <unk> terminal is starved to effectively zero mass.
Grammar symmetric_grammar(double p) {
  Grammar g;
  g.num_nonterminals = 1;
  g.terminal_vocab = {{seminfo::kUnkToken, 0}, {"a", 1}};
  g.binary_logits = {std::log(p)};
  g.lexical_logits = {-1e9, std::log(1 - p)};
  return g;
}

std::vector<int> random_sentence(int n, int vocab, std::mt19937_64& rng) {
  std::vector<int> s(n);
  for (int& w : s) w = static_cast<int>(rng() % vocab);
  return s;
}

}  // namespace

TEST_CASE("pcfg: normalize is a per-LHS softmax") {
  SUBCASE("uniform over {S->SS, S->a}") {
    Grammar g = symmetric_grammar(0.5);
    g.binary_logits = {0.0};
    g.lexical_logits = {-1e9, 0.0};
    const Grammar n = normalize(g);
    CHECK(std::exp(n.binary_logits[0]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::exp(n.lexical_logits[1]) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("single effective rule gets probability one") {
    Grammar g;
    g.num_nonterminals = 1;
    g.terminal_vocab = {{seminfo::kUnkToken, 0}};
    g.binary_logits = {-1e9};
    g.lexical_logits = {2.5};
    const Grammar n = normalize(g);
    CHECK(std::exp(n.lexical_logits[0]) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("per-LHS mass is one and normalize is idempotent") {
    const Grammar g = seminfo::random_grammar(4, {"x", "y", "z"}, 0.9, 11);
    const Grammar n = normalize(g);
    const int nt = 4, v = 4;
    for (int a = 0; a < nt; ++a) {
      double mass = 0;
      for (int r = 0; r < nt * nt; ++r)
        mass += std::exp(n.binary_logits[a * nt * nt + r]);
      for (int w = 0; w < v; ++w)
        mass += std::exp(n.lexical_logits[a * v + w]);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
    const Grammar n2 = normalize(n);
    for (std::size_t r = 0; r < n.binary_logits.size(); ++r)
      CHECK(n2.binary_logits[r] == doctest::Approx(n.binary_logits[r]).epsilon(1e-12));
  }
  SUBCASE("shifting one LHS's logits leaves probabilities unchanged") {
    Grammar g = seminfo::random_grammar(3, {"x", "y"}, 0.7, 5);
    const Grammar before = normalize(g);
    const int nt = 3, v = 3;
    for (int r = 0; r < nt * nt; ++r) g.binary_logits[2 * nt * nt + r] += 3.7;
    for (int w = 0; w < v; ++w) g.lexical_logits[2 * v + w] += 3.7;
    const Grammar after = normalize(g);
    for (std::size_t r = 0; r < before.binary_logits.size(); ++r)
      CHECK(after.binary_logits[r] ==
            doctest::Approx(before.binary_logits[r]).epsilon(1e-12));
  }
}

TEST_CASE("pcfg: inside matches hand values and enumeration") {
  SUBCASE("hand-computable symmetric grammar") {
    const Grammar g = symmetric_grammar(0.5);
    CHECK(seminfo::inside(g, {1, 1}).log_z ==
          doctest::Approx(std::log(0.125)).epsilon(1e-12));
    CHECK(seminfo::inside(g, {1}).log_z ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(seminfo::inside(g, {}), std::invalid_argument);
    CHECK_THROWS_AS(seminfo::inside(g, {1, 9}), std::invalid_argument);
  }
  SUBCASE("random grammars vs the enumeration oracle") {
    std::mt19937_64 rng(404);
    for (int nt : {1, 2, 3, 5}) {
      for (int n = 1; n <= 6; ++n) {
        const Grammar g =
            seminfo::random_grammar(nt, {"w0", "w1", "w2"}, 0.8, 100 + nt + n);
        const auto sent = random_sentence(n, 4, rng);
        const auto oracle = oracles::enumerate_pcfg(g, sent);
        const double log_z = seminfo::inside(g, sent).log_z;
        CHECK(rel_diff(log_z, std::log(oracle.z)) <= 1e-9);
      }
    }
  }
  SUBCASE("the two oracles agree with each other") {
    std::mt19937_64 rng(7);
    const Grammar g = seminfo::random_grammar(2, {"w0", "w1"}, 0.8, 21);
    const auto sent = random_sentence(4, 3, rng);
    const auto a = oracles::enumerate_pcfg(g, sent);
    const auto b = oracles::enumerate_pcfg_counts(g, sent);
    CHECK(rel_diff(a.z, b.z) <= 1e-12);
  }
}

TEST_CASE("pcfg: span posteriors match enumeration and conserve mass") {
  SUBCASE("symmetric three-token case") {
    const Grammar g = symmetric_grammar(0.5);
    const auto post = seminfo::span_posteriors(g, {1, 1, 1});
    CHECK(post.at({0, 2}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(post.at({1, 3}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(post.at({0, 3}) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("single-token sentence") {
    const Grammar g = symmetric_grammar(0.5);
    const auto post = seminfo::span_posteriors(g, {1});
    REQUIRE(post.size() == 1);
    CHECK(post.at({0, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("random grammars vs enumeration") {
    std::mt19937_64 rng(2024);
    for (int nt : {2, 3, 5}) {
      for (int n = 3; n <= 6; ++n) {
        const Grammar g =
            seminfo::random_grammar(nt, {"w0", "w1", "w2"}, 0.8, 50 + nt + n);
        const auto sent = random_sentence(n, 4, rng);
        const auto oracle = oracles::enumerate_pcfg(g, sent);
        const auto post = seminfo::span_posteriors(g, sent);

        double mass = 0;
        for (const auto& [s, p] : post) {
          double want = 0;
          for (const auto& [spans, m] : oracle.shape_mass) {
            if (std::binary_search(spans.begin(), spans.end(), s))
              want += m / oracle.z;
          }
          CHECK(std::abs(p - want) <= 1e-8);
          CHECK(p >= -1e-9);
          CHECK(p <= 1 + 1e-9);
          mass += p;
        }
        CHECK(post.at({0, static_cast<std::uint32_t>(n)}) ==
              doctest::Approx(1.0).epsilon(1e-9));
        CHECK(mass == doctest::Approx(n - 1.0).epsilon(1e-6));
      }
    }
  }
  SUBCASE("unparsable sentences are an error") {
    Grammar g = symmetric_grammar(0.5);
    g.binary_logits = {-std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(seminfo::span_posteriors(g, {1, 1}), std::runtime_error);
  }
}

TEST_CASE("pcfg: expected rule counts") {
  SUBCASE("conservation: binary counts sum to n-1, lexical to n") {
    std::mt19937_64 rng(31);
    const Grammar g =
        seminfo::random_grammar(4, {"w0", "w1", "w2", "w3"}, 0.8, 77);
    const auto sent = random_sentence(7, 5, rng);
    const auto counts = seminfo::expected_rule_counts(g, sent);
    double nb = 0, nl = 0;
    for (double c : counts.binary) nb += c;
    for (double c : counts.lexical) nl += c;
    CHECK(nb == doctest::Approx(6.0).epsilon(1e-6));
    CHECK(nl == doctest::Approx(7.0).epsilon(1e-6));
  }
  SUBCASE("counts match the explicit labeled enumeration") {
    std::mt19937_64 rng(32);
    for (auto [nt, n] : {std::pair{2, 4}, {3, 3}}) {
      const Grammar g =
          seminfo::random_grammar(nt, {"w0", "w1"}, 0.8, 900 + nt);
      const auto sent = random_sentence(n, 3, rng);
      const auto counts = seminfo::expected_rule_counts(g, sent);
      const auto oracle = oracles::enumerate_pcfg_counts(g, sent);
      for (std::size_t r = 0; r < counts.binary.size(); ++r)
        CHECK(std::abs(counts.binary[r] - oracle.binary[r]) <= 1e-8);
      for (std::size_t r = 0; r < counts.lexical.size(); ++r)
        CHECK(std::abs(counts.lexical[r] - oracle.lexical[r]) <= 1e-8);
    }
  }
  SUBCASE("logit gradients match central finite differences on every logit") {
    const Grammar g = seminfo::random_grammar(2, {"x", "y"}, 0.8, 1234);
    const std::vector<int> sent{1, 2, 1, 2};
    const auto counts = seminfo::expected_rule_counts(g, sent);
    const double h = 1e-5;
    for (std::size_t r = 0; r < g.binary_logits.size(); ++r) {
      Grammar gp = g, gm = g;
      gp.binary_logits[r] += h;
      gm.binary_logits[r] -= h;
      const double fd =
          (seminfo::inside(gp, sent).log_z - seminfo::inside(gm, sent).log_z) /
          (2 * h);
      CHECK(rel_diff(counts.binary_grad[r], fd) <= 1e-4);
    }
    for (std::size_t r = 0; r < g.lexical_logits.size(); ++r) {
      Grammar gp = g, gm = g;
      gp.lexical_logits[r] += h;
      gm.lexical_logits[r] -= h;
      const double fd =
          (seminfo::inside(gp, sent).log_z - seminfo::inside(gm, sent).log_z) /
          (2 * h);
      CHECK(rel_diff(counts.lexical_grad[r], fd) <= 1e-4);
    }
  }
  SUBCASE("logit gradient equals count minus LHS mass times probability") {
    std::mt19937_64 rng(34);
    const Grammar g = seminfo::random_grammar(3, {"w0", "w1"}, 0.8, 55);
    const Grammar n = normalize(g);
    const auto sent = random_sentence(5, 3, rng);
    const auto counts = seminfo::expected_rule_counts(g, sent);
    const int nt = 3, v = 3;
    for (int a = 0; a < nt; ++a) {
      double lhs_mass = 0;
      for (int r = 0; r < nt * nt; ++r) lhs_mass += counts.binary[a * nt * nt + r];
      for (int w = 0; w < v; ++w) lhs_mass += counts.lexical[a * v + w];
      for (int r = 0; r < nt * nt; ++r) {
        const double pi = std::exp(n.binary_logits[a * nt * nt + r]);
        CHECK(std::abs(counts.binary_grad[a * nt * nt + r] -
                       (counts.binary[a * nt * nt + r] - lhs_mass * pi)) <=
              1e-9);
      }
    }
  }
}

TEST_CASE("pcfg: posterior sampling is exact and deterministic") {
  SUBCASE("two tokens give the unique tree") {
    const Grammar g = symmetric_grammar(0.3);
    std::mt19937_64 rng(1);
    const auto t = seminfo::sample_tree_posterior(g, {1, 1}, rng);
    CHECK(t.spans == std::vector<Span>{{0, 1}, {0, 2}, {1, 2}});
  }
  SUBCASE("empirical frequencies track the enumerated posterior") {
    const Grammar g = seminfo::random_grammar(3, {"w0", "w1"}, 0.8, 606);
    const std::vector<int> sent{1, 2, 0, 1};
    const auto oracle = oracles::enumerate_pcfg(g, sent);
    std::mt19937_64 rng(99);
    std::map<std::vector<Span>, int> freq;
    const int kSamples = 50000;
    int invalid = 0;
    for (int s = 0; s < kSamples; ++s) {
      const auto t = seminfo::sample_tree_posterior(g, sent, rng);
      if (!seminfo::is_valid_tree(t)) ++invalid;
      ++freq[t.spans];
    }
    CHECK(invalid == 0);
    double tv = 0;
    for (const auto& [spans, mass] : oracle.shape_mass) {
      const double want = mass / oracle.z;
      const double got = freq[spans] / double(kSamples);
      tv += std::abs(want - got);
    }
    CHECK(tv / 2 <= 0.02);
  }
  SUBCASE("fixed seed, fixed draws") {
    const Grammar g = seminfo::random_grammar(3, {"w0", "w1"}, 0.8, 606);
    const std::vector<int> sent{1, 2, 0, 1, 2};
    std::mt19937_64 r1(777), r2(777);
    for (int s = 0; s < 20; ++s)
      CHECK(seminfo::sample_tree_posterior(g, sent, r1) ==
            seminfo::sample_tree_posterior(g, sent, r2));
  }
  SUBCASE("single token") {
    const Grammar g = symmetric_grammar(0.5);
    std::mt19937_64 rng(5);
    const auto t = seminfo::sample_tree_posterior(g, {1}, rng);
    CHECK(t.spans == std::vector<Span>{{0, 1}});
  }
}

TEST_CASE("pcfg: viterbi matches the enumeration argmax") {
  SUBCASE("random grammars") {
    std::mt19937_64 rng(515);
    for (int nt : {1, 2, 3, 5}) {
      for (int n = 2; n <= 5; ++n) {
        const Grammar g =
            seminfo::random_grammar(nt, {"w0", "w1", "w2"}, 0.8, 300 + nt + n);
        const auto sent = random_sentence(n, 4, rng);
        const auto t = seminfo::viterbi_tree(g, sent);
        REQUIRE(seminfo::is_valid_tree(t));
        const auto oracle = oracles::enumerate_pcfg(g, sent);
        if (nt > 1) {
          CHECK(t.spans == oracle.argmax_spans);
        } else {
          // A single nonterminal ties every shape exactly (identical rule
          // multiset), so only optimality is comparable.
          CHECK(rel_diff(std::log(oracle.shape_mass.at(t.spans)),
                         std::log(oracle.max_joint)) <= 1e-9);
        }
      }
    }
  }
  SUBCASE("exact ties come out left-branching") {
    const Grammar g = symmetric_grammar(0.5);
    CHECK(seminfo::nontrivial_spans(seminfo::viterbi_tree(g, {1, 1, 1})) ==
          std::vector<Span>{{0, 2}});
    CHECK(seminfo::nontrivial_spans(seminfo::viterbi_tree(g, {1, 1, 1, 1})) ==
          std::vector<Span>{{0, 2}, {0, 3}});
  }
}

TEST_CASE("pcfg: tree_log_joint decomposes log Z over shapes") {
  const Grammar g = seminfo::random_grammar(3, {"w0", "w1"}, 0.8, 808);
  std::mt19937_64 rng(606);
  const auto sent = random_sentence(5, 3, rng);
  const auto oracle = oracles::enumerate_pcfg(g, sent);
  const double log_z = seminfo::inside(g, sent).log_z;

  double total = 0;
  for (const auto& t : oracles::all_binary_trees(5)) {
    const double lj = seminfo::tree_log_joint(g, sent, t);
    CHECK(rel_diff(lj, std::log(oracle.shape_mass.at(t.spans))) <= 1e-9);
    total += std::exp(lj);
  }
  CHECK(rel_diff(std::log(total), log_z) <= 1e-9);

  SUBCASE("tape variant agrees and differentiates") {
    const auto t = oracles::all_binary_trees(5)[2];
    ad::Tape tape;
    const auto tg = seminfo::tape_grammar(tape, g);
    const auto lj = seminfo::tape_tree_log_joint(tape, tg, sent, t);
    CHECK(tape.value(lj) ==
          doctest::Approx(seminfo::tree_log_joint(g, sent, t)).epsilon(1e-12));

    const auto adj = tape.gradient(lj, tg.binary_leaf);
    const double h = 1e-5;
    for (std::size_t r = 0; r < g.binary_logits.size(); r += 7) {
      Grammar gp = g, gm = g;
      gp.binary_logits[r] += h;
      gm.binary_logits[r] -= h;
      const double fd = (seminfo::tree_log_joint(gp, sent, t) -
                         seminfo::tree_log_joint(gm, sent, t)) /
                        (2 * h);
      const double got = adj[r] == seminfo::ad::kNoVar ? 0 : tape.value(adj[r]);
      CHECK(rel_diff(got, fd) <= 1e-4);
    }
  }
}

TEST_CASE("pcfg: tape inside agrees with the plain chart") {
  const Grammar g = seminfo::random_grammar(3, {"w0", "w1", "w2"}, 0.8, 4242);
  std::mt19937_64 rng(11);
  const auto sent = random_sentence(6, 4, rng);
  const auto plain = seminfo::inside(g, sent);

  ad::Tape tape;
  const auto tg = seminfo::tape_grammar(tape, g);
  const auto chart = seminfo::tape_inside(tape, tg, sent);
  CHECK(tape.value(chart.log_z) == doctest::Approx(plain.log_z).epsilon(1e-12));
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j <= 6; ++j)
      for (int a = 0; a < 3; ++a)
        CHECK(tape.value(chart.beta_at(i, j, a)) ==
              doctest::Approx(plain.beta_at(i, j, a)).epsilon(1e-12));

  SUBCASE("a reverse pass is itself differentiable") {
    const std::vector<ad::Var> wrt{chart.beta_at(0, 2, 1)};
    const auto adj = tape.gradient(chart.log_z, wrt);
    REQUIRE(adj[0] != ad::kNoVar);
    const auto second = tape.gradient(adj[0], tg.binary_leaf);
    double norm = 0;
    for (const auto v : second)
      if (v != ad::kNoVar) norm += tape.value(v) * tape.value(v);
    CHECK(std::isfinite(norm));
    CHECK(norm > 0);
  }
}

TEST_CASE("pcfg: log-space stability at n=40, 32 nonterminals") {
  std::vector<std::string> vocab;
  for (int w = 0; w < 20; ++w) vocab.push_back("w" + std::to_string(w));
  const Grammar g = seminfo::random_grammar(32, vocab, 1.0, 123456);
  std::mt19937_64 rng(3);
  const auto sent = random_sentence(40, 21, rng);
  const auto chart = seminfo::inside(g, sent);
  CHECK(std::isfinite(chart.log_z));
  CHECK(chart.log_z <= 1e-9);
  CHECK(chart.log_z >= -1e5);
  int bad = 0;
  for (int i = 0; i < 40; ++i)
    for (int j = i + 1; j <= 40; ++j)
      for (int a = 0; a < 32; ++a) {
        const double b = chart.beta_at(i, j, a);
        if (!std::isfinite(b) || b > 1e-9) ++bad;
      }
  CHECK(bad == 0);
}

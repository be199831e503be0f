#ifndef SEMINFO_PCFG_HPP
#define SEMINFO_PCFG_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "seminfo/ad.hpp"
#include "seminfo/tree.hpp"

namespace seminfo {

inline constexpr const char* kUnkToken = "<unk>";

// Tabular CNF PCFG over a shared nonterminal set: every symbol may both
// branch (A -> B C) and emit a terminal (A -> w). Rule probabilities are the
// per-LHS softmax over the concatenation of that LHS's binary and lexical
// logits. Every operation below applies the softmax itself, so a Grammar may
// hold raw logits or the output of normalize() interchangeably.
struct Grammar {
  int num_nonterminals = 0;  // start symbol at index 0 by convention
  std::unordered_map<std::string, int> terminal_vocab;  // kUnkToken at 0
  std::vector<double> binary_logits;   // (A, B, C) row-major
  std::vector<double> lexical_logits;  // (A, w) row-major
  int start = 0;

  int vocab_size() const { return static_cast<int>(terminal_vocab.size()); }
  double& binary_logit(int a, int b, int c) {
    return binary_logits[(static_cast<std::size_t>(a) * num_nonterminals + b) *
                             num_nonterminals +
                         c];
  }
  double binary_logit(int a, int b, int c) const {
    return binary_logits[(static_cast<std::size_t>(a) * num_nonterminals + b) *
                             num_nonterminals +
                         c];
  }
  double& lexical_logit(int a, int w) {
    return lexical_logits[static_cast<std::size_t>(a) * vocab_size() + w];
  }
  double lexical_logit(int a, int w) const {
    return lexical_logits[static_cast<std::size_t>(a) * vocab_size() + w];
  }

  // Vocabulary lookup; out-of-vocabulary words map to kUnkToken.
  int token_index(const std::string& word) const;
  std::vector<int> map_tokens(const std::vector<std::string>& words) const;
};

// Fresh grammar with i.i.d. Gaussian logits (mean 0, stddev init_scale). The
// vocabulary is kUnkToken plus `terminals` in order (duplicates ignored).
Grammar random_grammar(int num_nonterminals,
                       const std::vector<std::string>& terminals,
                       double init_scale, std::uint64_t seed);

// Per-LHS log-softmax; the result stores log probabilities in the logit
// fields and is a fixed point of normalize.
Grammar normalize(const Grammar& g);

// Log-space inside chart; beta(i, j, A) = log P(A =>* w_i..w_{j-1}).
struct InsideChart {
  int n = 0;
  int num_nonterminals = 0;
  std::vector<double> beta;
  double log_z = 0;

  double beta_at(int i, int j, int a) const {
    return beta[(static_cast<std::size_t>(i) * (n + 1) + j) *
                    num_nonterminals +
                a];
  }
};

// CKY inside pass over vocabulary indices (see Grammar::map_tokens).
// Throws std::invalid_argument on an empty sentence or a bad token index.
InsideChart inside(const Grammar& g, const std::vector<int>& sentence);

using PosteriorTable = std::map<Span, double>;

// P(span is a constituent | x) for the root and every span of length >= 2,
// via reverse accumulation over the inside recursion. Throws
// std::runtime_error when the sentence is unparsable (log Z = -inf).
PosteriorTable span_posteriors(const Grammar& g,
                               const std::vector<int>& sentence);

struct RuleCounts {
  // Expected usage counts E[c(rule) | x]; binary counts sum to n - 1 and
  // lexical counts to n.
  std::vector<double> binary;
  std::vector<double> lexical;
  // d log Z / d logit: the same counts pushed through the softmax Jacobian.
  std::vector<double> binary_grad;
  std::vector<double> lexical_grad;
};

RuleCounts expected_rule_counts(const Grammar& g,
                                const std::vector<int>& sentence);

// Exact draw from P(t | x) (labelings marginalized out by the top-down
// walk). Deterministic for a fixed rng state.
ConstituentTree sample_tree_posterior(const Grammar& g,
                                      const std::vector<int>& sentence,
                                      std::mt19937_64& rng);

// argmax over bracketings and labelings of P(x, t). Score ties between
// split points go to the larger split, so exact ties come out
// left-branching.
ConstituentTree viterbi_tree(const Grammar& g,
                             const std::vector<int>& sentence);

// log P(x, t): mass of the derivations consistent with the bracketing t,
// labelings summed out. log P(t | x) = tree_log_joint - inside().log_z.
double tree_log_joint(const Grammar& g, const std::vector<int>& sentence,
                      const ConstituentTree& t);

// ---------------------------------------------------------------------------
// Tape-recorded variants, for derivatives with respect to the raw logits.

struct TapePcfg {
  int num_nonterminals = 0;
  int vocab_size = 0;
  int start = 0;
  std::vector<ad::Var> binary_leaf;  // raw logit leaves
  std::vector<ad::Var> lexical_leaf;
  std::vector<ad::Var> binary_lp;  // per-LHS log-softmaxed
  std::vector<ad::Var> lexical_lp;

  ad::Var binary_lp_at(int a, int b, int c) const {
    return binary_lp[(static_cast<std::size_t>(a) * num_nonterminals + b) *
                         num_nonterminals +
                     c];
  }
  ad::Var lexical_lp_at(int a, int w) const {
    return lexical_lp[static_cast<std::size_t>(a) * vocab_size + w];
  }
};

TapePcfg tape_grammar(ad::Tape& tape, const Grammar& g);

struct TapeChart {
  int n = 0;
  int num_nonterminals = 0;
  std::vector<ad::Var> beta;
  ad::Var log_z = ad::kNoVar;

  ad::Var beta_at(int i, int j, int a) const {
    return beta[(static_cast<std::size_t>(i) * (n + 1) + j) *
                    num_nonterminals +
                a];
  }
};

TapeChart tape_inside(ad::Tape& tape, const TapePcfg& g,
                      const std::vector<int>& sentence);

ad::Var tape_tree_log_joint(ad::Tape& tape, const TapePcfg& g,
                            const std::vector<int>& sentence,
                            const ConstituentTree& t);

}  // namespace seminfo

#endif  // SEMINFO_PCFG_HPP

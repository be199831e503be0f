#ifndef SEMINFO_TREECRF_HPP
#define SEMINFO_TREECRF_HPP

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "seminfo/ad.hpp"
#include "seminfo/tree.hpp"

namespace seminfo {

// Log-linear distribution over full binary bracketings,
// P(t) = exp(sum_{s in t} phi(s)) / Z. Only spans of length >= 2 carry
// potentials (single-token spans appear in every tree); missing spans read
// as 0, and the whole-sentence span contributes a constant.
struct SpanPotentialTable {
  std::uint32_t n = 0;
  std::map<Span, double> phi;

  double at(Span s) const {
    auto it = phi.find(s);
    return it == phi.end() ? 0.0 : it->second;
  }
};

// log Z = log sum over bracketings of exp(sum phi), via an O(n^3) log-space
// span DP. Throws std::invalid_argument for n = 0 or out-of-domain entries.
double crf_partition(const SpanPotentialTable& phi);

// argmax_t sum_{s in t} phi(s) by max-sum CKY. Split ties go to the larger
// split point, so exact ties come out left-branching.
ConstituentTree crf_viterbi(const SpanPotentialTable& phi);

// k exact i.i.d. samples via inside weights and a top-down walk;
// deterministic for a fixed rng state.
std::vector<ConstituentTree> crf_sample(const SpanPotentialTable& phi,
                                        std::mt19937_64& rng, int k);

// H(P) = log Z - E[sum phi], the expectation taken exactly over span
// marginals; always >= 0 up to rounding.
double crf_entropy(const SpanPotentialTable& phi);

// P(s in t) for the root and every span of length >= 2, by reverse
// accumulation over the partition DP.
std::map<Span, double> crf_marginals(const SpanPotentialTable& phi);

// ---------------------------------------------------------------------------
// Tape-recorded variants. Potentials are arbitrary tape nodes (training
// feeds span posteriors here); entries must not be computed from one
// another. Missing/unset spans are treated as potential 0.

struct TapeCrf {
  int n = 0;
  std::vector<ad::Var> phi;  // dense (i,j), kNoVar where unset

  ad::Var at(int i, int j) const {
    return phi[static_cast<std::size_t>(i) * (n + 1) + j];
  }
  void set(int i, int j, ad::Var v) {
    phi[static_cast<std::size_t>(i) * (n + 1) + j] = v;
  }
};

TapeCrf make_tape_crf(int n);

ad::Var tape_crf_partition(ad::Tape& tape, const TapeCrf& c);

// log P(t) = sum_{s in t} phi(s) - log_z for a tree over the same n.
ad::Var tape_crf_tree_log_prob(ad::Tape& tape, const TapeCrf& c,
                               ad::Var log_z, const ConstituentTree& t);

// H = log_z - sum_s mu_s phi_s with mu obtained by a reverse pass over
// log_z, itself recorded on the tape (so H is differentiable again).
ad::Var tape_crf_entropy(ad::Tape& tape, const TapeCrf& c, ad::Var log_z);

}  // namespace seminfo

#endif  // SEMINFO_TREECRF_HPP

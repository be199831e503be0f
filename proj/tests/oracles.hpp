#ifndef SEMINFO_TESTS_ORACLES_HPP
#define SEMINFO_TESTS_ORACLES_HPP

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "seminfo/maxsub.hpp"
#include "seminfo/pcfg.hpp"
#include "seminfo/tree.hpp"
#include "seminfo/treecrf.hpp"

// Brute-force reference implementations used to cross-check the production
// code. Everything here favors obviousness over speed.
namespace oracles {

// All full binary bracketings over n tokens; Catalan(n-1) of them.
std::vector<seminfo::ConstituentTree> all_binary_trees(std::uint32_t n);

// Catalan numbers C_0.. as doubles (exact for the small arguments used here).
double catalan(std::uint32_t k);

// Set intersection of the two substring sets, enumerated outright.
std::set<seminfo::TokenString> brute_common_substrings(
    const seminfo::TokenString& a, const seminfo::TokenString& b);

// Quadratic enumeration + pairwise containment filter.
std::set<seminfo::TokenString> brute_maximal_substrings(
    const seminfo::TokenString& a, const seminfo::TokenString& b);

// Exhaustive PCFG reference: for every tree shape, nonterminal labelings
// are summed (or maximized) bottom-up on the explicit shape in probability
// space -- a different algorithm from the log-space charts under test.
struct PcfgEnumeration {
  double z = 0;  // sentence probability, summed over shapes
  // full sorted span set of the shape -> P(x, shape)
  std::map<std::vector<seminfo::Span>, double> shape_mass;
  double max_joint = 0;  // probability of the best labeled derivation
  std::vector<seminfo::Span> argmax_spans;
};
PcfgEnumeration enumerate_pcfg(const seminfo::Grammar& g,
                               const std::vector<int>& sentence);

// Fully explicit enumeration over shapes x labelings. Exponential; tiny
// instances only. Counts are posterior expectations E[c(rule) | x].
struct PcfgCountsEnumeration {
  double z = 0;
  std::vector<double> binary;
  std::vector<double> lexical;
};
PcfgCountsEnumeration enumerate_pcfg_counts(const seminfo::Grammar& g,
                                            const std::vector<int>& sentence);

// Exhaustive span-CRF reference: every bracketing weighted in probability
// space by exp(sum of its potentials), plus the moments derived from that
// explicit table.
struct CrfEnumeration {
  double z = 0;
  // full sorted span set -> unnormalized weight exp(sum phi)
  std::map<std::vector<seminfo::Span>, double> tree_weight;
  double best_score = 0;  // max over trees of sum phi
  std::vector<seminfo::Span> argmax_spans;
  double entropy = 0;                        // -sum p log p
  std::map<seminfo::Span, double> marginals;  // spans of length >= 2
};
CrfEnumeration enumerate_crf(const seminfo::SpanPotentialTable& phi);

}  // namespace oracles

#endif  // SEMINFO_TESTS_ORACLES_HPP

#ifndef SEMINFO_TREE_HPP
#define SEMINFO_TREE_HPP

#include <compare>
#include <cstdint>
#include <vector>

namespace seminfo {

// Half-open token span [i, j).
struct Span {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Full binary bracketing over n tokens, stored as the sorted set of all its
// spans: the root (0,n), every single-token span, and the internal splits.
struct ConstituentTree {
  std::uint32_t n = 0;
  std::vector<Span> spans;
  bool operator==(const ConstituentTree&) const = default;
};

// True iff t is a full binary bracketing: exactly 2n-1 distinct in-bounds
// spans, containing the root and all single-token spans, with no two spans
// crossing. (A laminar family of that size is necessarily a binary tree.)
bool is_valid_tree(const ConstituentTree& t);

// Spans of length >= 2 including the root; a binary tree has n-1 of these.
std::vector<Span> internal_spans(const ConstituentTree& t);

// Spans of length >= 2 excluding the root: the ones that distinguish
// bracketings from each other (used for scoring and F1).
std::vector<Span> nontrivial_spans(const ConstituentTree& t);

// Reconstructs a full tree from its length>=2 spans (root optional in the
// input); single-token spans are filled in. Does not validate.
ConstituentTree tree_from_internal_spans(std::uint32_t n,
                                         const std::vector<Span>& internal);

}  // namespace seminfo

#endif  // SEMINFO_TREE_HPP

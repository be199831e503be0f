#include "seminfo/tree.hpp"

#include <algorithm>
#include <set>

namespace seminfo {

bool is_valid_tree(const ConstituentTree& t) {
  const std::uint32_t n = t.n;
  if (n == 0) return false;
  if (t.spans.size() != 2 * static_cast<std::size_t>(n) - 1) return false;

  std::set<Span> s(t.spans.begin(), t.spans.end());
  if (s.size() != t.spans.size()) return false;
  for (const Span& sp : s) {
    if (!(sp.i < sp.j && sp.j <= n)) return false;
  }
  if (!s.count(Span{0, n})) return false;
  for (std::uint32_t k = 0; k < n; ++k) {
    if (!s.count(Span{k, k + 1})) return false;
  }
  // Laminarity: no two spans may cross. Together with the size and
  // membership checks above this forces a full binary bracketing.
  const std::vector<Span> v(s.begin(), s.end());
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      if (v[a].i < v[b].i && v[b].i < v[a].j && v[a].j < v[b].j) return false;
    }
  }
  return true;
}

std::vector<Span> internal_spans(const ConstituentTree& t) {
  std::vector<Span> out;
  for (const Span& sp : t.spans) {
    if (sp.j - sp.i >= 2) out.push_back(sp);
  }
  return out;
}

std::vector<Span> nontrivial_spans(const ConstituentTree& t) {
  std::vector<Span> out;
  for (const Span& sp : t.spans) {
    if (sp.j - sp.i >= 2 && !(sp.i == 0 && sp.j == t.n)) out.push_back(sp);
  }
  return out;
}

ConstituentTree tree_from_internal_spans(std::uint32_t n,
                                         const std::vector<Span>& internal) {
  std::set<Span> s(internal.begin(), internal.end());
  s.insert(Span{0, n});
  for (std::uint32_t k = 0; k < n; ++k) s.insert(Span{k, k + 1});
  ConstituentTree t;
  t.n = n;
  t.spans.assign(s.begin(), s.end());
  return t;
}

}  // namespace seminfo

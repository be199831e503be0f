#include "seminfo/ad.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seminfo::ad {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Var Tape::log(Var a) { return push(Op::kLog, a, 0, std::log(value_[a])); }

Var Tape::exp(Var a) { return push(Op::kExp, a, 0, std::exp(value_[a])); }

Var Tape::add_n(std::span<const Var> xs) {
  if (xs.empty()) return constant(0.0);
  if (xs.size() == 1) return xs[0];
  if (xs.size() == 2) return add(xs[0], xs[1]);
  double s = 0.0;
  const auto begin = static_cast<std::uint32_t>(pool_.size());
  for (Var x : xs) {
    pool_.push_back(x);
    s += value_[x];
  }
  return push(Op::kAddN, begin, static_cast<std::uint32_t>(pool_.size()), s);
}

Var Tape::logsumexp(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("logsumexp over empty set");
  double m = kNegInf;
  for (Var x : xs) m = std::max(m, value_[x]);
  double v;
  if (m == kNegInf) {
    v = kNegInf;
  } else {
    double s = 0.0;
    for (Var x : xs) s += std::exp(value_[x] - m);
    v = m + std::log(s);
  }
  const auto begin = static_cast<std::uint32_t>(pool_.size());
  for (Var x : xs) pool_.push_back(x);
  return push(Op::kLse, begin, static_cast<std::uint32_t>(pool_.size()), v);
}

void Tape::clear() {
  node_.clear();
  value_.clear();
  pool_.clear();
}

std::vector<Var> Tape::gradient(Var output, std::span<const Var> wrt) {
  const std::uint32_t n = output + 1;
  assert(output < node_.size());

  // Phase 1: mark the backward-reachable subgraph.
  reach_.assign(n, 0);
  reach_[output] = 1;
  for (std::uint32_t i = output + 1; i-- > 0;) {
    if (!reach_[i]) continue;
    const Node& nd = node_[i];
    switch (nd.op) {
      case Op::kConst:
      case Op::kLeaf:
        break;
      case Op::kNeg:
      case Op::kLog:
      case Op::kExp:
        reach_[nd.a] = 1;
        break;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
        reach_[nd.a] = 1;
        reach_[nd.b] = 1;
        break;
      case Op::kAddN:
      case Op::kLse:
        for (std::uint32_t p = nd.a; p < nd.b; ++p) reach_[pool_[p]] = 1;
        break;
    }
  }

  // Phase 2: count adjoint contributions per node, then lay them out as a
  // CSR-style flat array so accumulation needs no per-node allocation.
  slot_.assign(n + 1, 0);
  auto count = [&](std::uint32_t in) { ++slot_[in + 1]; };
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!reach_[i]) continue;
    const Node& nd = node_[i];
    switch (nd.op) {
      case Op::kConst:
      case Op::kLeaf:
        break;
      case Op::kNeg:
      case Op::kLog:
      case Op::kExp:
        count(nd.a);
        break;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
        count(nd.a);
        count(nd.b);
        break;
      case Op::kAddN:
      case Op::kLse:
        for (std::uint32_t p = nd.a; p < nd.b; ++p) count(pool_[p]);
        break;
    }
  }
  for (std::uint32_t i = 0; i < n; ++i) slot_[i + 1] += slot_[i];
  const std::uint32_t total = slot_[n];
  contrib_.assign(total, kNoVar);
  // fill_pos[i] tracks the next free slot for node i; reuse slot_ by copy.
  std::vector<std::uint32_t> fill(slot_.begin(), slot_.end() - 1);

  auto emit = [&](std::uint32_t in, Var c) { contrib_[fill[in]++] = c; };

  // Phase 3: walk nodes in reverse creation order. New nodes created here
  // have indices >= n and are never revisited by this pass.
  std::vector<Var> adj(n, kNoVar);
  const Var one = constant(1.0);
  std::vector<Var> tmp;
  for (std::uint32_t i = output + 1; i-- > 0;) {
    if (!reach_[i]) continue;
    Var a_i;
    if (i == output) {
      // The output may also feed later parts of the expression; fold any
      // contributions in with the unit seed.
      tmp.clear();
      tmp.push_back(one);
      for (std::uint32_t p = slot_[i]; p < fill[i]; ++p) tmp.push_back(contrib_[p]);
      a_i = tmp.size() == 1 ? one : add_n(tmp);
    } else {
      const std::uint32_t lo = slot_[i], hi = fill[i];
      if (lo == hi) continue;  // reachable forward but no adjoint path
      if (hi - lo == 1) {
        a_i = contrib_[lo];
      } else {
        a_i = add_n(std::span<const Var>(contrib_.data() + lo, hi - lo));
      }
    }
    adj[i] = a_i;

    // By value: the emits below push new nodes, which can reallocate node_.
    const Node nd = node_[i];
    switch (nd.op) {
      case Op::kConst:
      case Op::kLeaf:
        break;
      case Op::kAdd:
        emit(nd.a, a_i);
        emit(nd.b, a_i);
        break;
      case Op::kAddN:
        for (std::uint32_t p = nd.a; p < nd.b; ++p) emit(pool_[p], a_i);
        break;
      case Op::kSub:
        emit(nd.a, a_i);
        emit(nd.b, neg(a_i));
        break;
      case Op::kMul:
        emit(nd.a, mul(a_i, nd.b));
        emit(nd.b, mul(a_i, nd.a));
        break;
      case Op::kDiv:
        // q = a / b: dq/da = 1/b, dq/db = -q/b.
        emit(nd.a, div(a_i, nd.b));
        emit(nd.b, neg(div(mul(a_i, static_cast<Var>(i)), nd.b)));
        break;
      case Op::kNeg:
        emit(nd.a, neg(a_i));
        break;
      case Op::kLog:
        emit(nd.a, div(a_i, nd.a));
        break;
      case Op::kExp:
        emit(nd.a, mul(a_i, static_cast<Var>(i)));
        break;
      case Op::kLse: {
        // dy/dx_k = exp(x_k - y); a zero-probability term contributes
        // nothing, and skipping it keeps -inf inputs from producing NaNs.
        for (std::uint32_t p = nd.a; p < nd.b; ++p) {
          const Var x = pool_[p];
          if (value_[x] == kNegInf) continue;
          const Var w = exp(sub(x, static_cast<Var>(i)));
          emit(x, mul(a_i, w));
        }
        break;
      }
    }
  }

  std::vector<Var> out(wrt.size(), kNoVar);
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    if (wrt[k] < n) out[k] = adj[wrt[k]];
  }
  return out;
}

}  // namespace seminfo::ad

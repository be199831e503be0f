#ifndef SEMINFO_AD_HPP
#define SEMINFO_AD_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace seminfo::ad {

// Handle into a Tape. Nodes are append-only, so a Var is valid for the
// lifetime of the tape (until clear()).
using Var = std::uint32_t;
inline constexpr Var kNoVar = 0xffffffffu;

// Scalar reverse-mode tape. Values are evaluated eagerly on construction.
// gradient() emits the adjoint computation as ordinary tape nodes, so the
// result of one reverse pass can be differentiated again (reverse over
// reverse); this is what makes second-order training gradients possible.
class Tape {
 public:
  Tape() = default;

  Var constant(double v) { return push(Op::kConst, 0, 0, v); }
  Var leaf(double v) { return push(Op::kLeaf, 0, 0, v); }

  Var add(Var a, Var b) { return push(Op::kAdd, a, b, value_[a] + value_[b]); }
  Var sub(Var a, Var b) { return push(Op::kSub, a, b, value_[a] - value_[b]); }
  Var mul(Var a, Var b) { return push(Op::kMul, a, b, value_[a] * value_[b]); }
  Var div(Var a, Var b) { return push(Op::kDiv, a, b, value_[a] / value_[b]); }
  Var neg(Var a) { return push(Op::kNeg, a, 0, -value_[a]); }
  Var log(Var a);
  Var exp(Var a);

  // Sum of an arbitrary number of terms; the workhorse of adjoint
  // accumulation. add_n({}) is the constant 0.
  Var add_n(std::span<const Var> xs);
  // log(sum(exp(x))) with the usual max shift; xs must be non-empty.
  Var logsumexp(std::span<const Var> xs);

  double value(Var v) const { return value_[v]; }
  std::size_t size() const { return node_.size(); }
  void clear();

  // Reverse pass seeded with d(output)/d(output) = 1. Returns one adjoint
  // Var per entry of wrt, kNoVar where output does not depend on it. The
  // pass walks only nodes created before `output`, so repeated calls (and
  // gradients of gradients) are well defined.
  std::vector<Var> gradient(Var output, std::span<const Var> wrt);

 private:
  enum class Op : std::uint8_t {
    kConst, kLeaf, kAdd, kSub, kMul, kDiv, kNeg, kLog, kExp, kAddN, kLse
  };
  struct Node {
    Op op;
    // Binary/unary ops use a (and b); n-ary ops store [a, b) into pool_.
    std::uint32_t a;
    std::uint32_t b;
  };

  Var push(Op op, std::uint32_t a, std::uint32_t b, double v) {
    node_.push_back(Node{op, a, b});
    value_.push_back(v);
    return static_cast<Var>(node_.size() - 1);
  }

  std::vector<Node> node_;
  std::vector<double> value_;
  std::vector<Var> pool_;

  // Scratch buffers reused across gradient() calls.
  std::vector<std::uint8_t> reach_;
  std::vector<std::uint32_t> slot_;
  std::vector<Var> contrib_;
};

}  // namespace seminfo::ad

#endif  // SEMINFO_AD_HPP

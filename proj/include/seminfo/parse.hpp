#ifndef SEMINFO_PARSE_HPP
#define SEMINFO_PARSE_HPP

#include <cstdint>
#include <random>

#include "seminfo/maxsub.hpp"
#include "seminfo/pcfg.hpp"
#include "seminfo/tree.hpp"

namespace seminfo {

// Maximum tree decoding: the bracketing whose spans carry the largest total
// score, ties left-branching. Spans absent from the table contribute 0.
ConstituentTree parse_mtd(const SpanScoreTable& scores);

// Minimum-Bayes-risk decoding: maximizes the expected number of spans
// shared with a tree drawn from the grammar's posterior, i.e. max-sum
// decoding over span posteriors. Throws if the sentence has no parse.
ConstituentTree parse_mbr(const Grammar& grammar,
                          const std::vector<int>& sentence);

enum class BaselineKind { kLeft, kRight, kRandom };

// Trivial baselines: fully left-branching, fully right-branching, or a
// uniform draw over all binary bracketings (rng required for kRandom).
ConstituentTree parse_baseline(std::uint32_t n, BaselineKind kind,
                               std::mt19937_64* rng = nullptr);

}  // namespace seminfo

#endif  // SEMINFO_PARSE_HPP

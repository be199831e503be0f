#ifndef SEMINFO_EVAL_HPP
#define SEMINFO_EVAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "seminfo/maxsub.hpp"
#include "seminfo/pcfg.hpp"
#include "seminfo/textnorm.hpp"
#include "seminfo/tree.hpp"

namespace seminfo {

struct LabeledSpan {
  Span span;
  std::string label;
  auto operator<=>(const LabeledSpan&) const = default;
};

// Reference structure over the original (pre-normalization) tokens; may be
// n-ary, and a span may carry several labels (unary chains).
struct GoldTree {
  std::uint32_t n = 0;
  std::set<LabeledSpan> labeled_spans;
};

// keep[k] is true for original-token positions that survive punctuation
// stripping; predictions are over the kept positions only.
std::vector<bool> keep_mask(const NormalizedSentence& s);

// Unlabeled F1 between the prediction (over kept coordinates) and the gold
// spans remapped to kept coordinates, after dropping trivial spans (whole
// sentence and single words). Returns nullopt — the skip marker — for
// sentences of at most two kept words or an empty filtered gold set.
// Throws when the mask length or the kept count disagree with the inputs.
std::optional<double> sentence_f1(const ConstituentTree& pred,
                                  const GoldTree& gold,
                                  const std::vector<bool>& keep);

// Mean of the non-skipped values; throws when everything was skipped.
double corpus_f1(const std::vector<std::optional<double>>& per_sentence);

struct LabelRecall {
  double recall = 0;
  std::int64_t support = 0;  // 0 flags a label absent from the gold corpus
};

// Fraction of non-trivial, punctuation-remapped gold spans with the given
// label that appear in the predicted span set, per label.
std::map<std::string, LabelRecall> label_recall(
    const std::vector<ConstituentTree>& preds,
    const std::vector<GoldTree>& golds,
    const std::vector<std::vector<bool>>& keeps,
    const std::vector<std::string>& labels);

// Pearson correlation of average ranks (ties share the mean rank).
// Returns nullopt when either side is constant.
std::optional<double> spearman(const std::vector<double>& xs,
                               const std::vector<double>& ys);

// tanh(mean(atanh(rho))) over the defined entries; values at or beyond
// +-1 are clipped to +-(1 - 1e-7) with a warning. Throws when no entry
// remains.
double fisher_aggregate(const std::vector<std::optional<double>>& rhos);

// Welch's unequal-variance t-test; two-tailed p-value.
struct TTestResult {
  double t = 0;
  double df = 0;
  double p_value = 1;
};
TTestResult welch_t_test(const std::vector<double>& xs,
                         const std::vector<double>& ys);

struct CheckpointEntry {
  std::int64_t step = 0;
  Grammar grammar;
};

struct CorrelationConfig {
  // Inclusive step ranges for the corpus-level sliding windows; when empty a
  // single window spanning all checkpoints is used.
  std::vector<std::pair<std::int64_t, std::int64_t>> windows;
};

struct CorrelationWindow {
  std::int64_t lo = 0, hi = 0;
  std::optional<double> seminfo_f1;
  std::optional<double> ll_f1;
};

struct CorrelationReport {
  // Per sentence: Spearman over per-checkpoint (F1, SemInfo) and (F1, log Z)
  // tuples; nullopt where the correlation is undefined or the sentence is
  // skipped by the F1 protocol.
  std::vector<std::optional<double>> seminfo_f1_rhos;
  std::vector<std::optional<double>> ll_f1_rhos;
  // Fisher aggregates of the above; nullopt when every rho is undefined.
  std::optional<double> seminfo_f1_aggregate;
  std::optional<double> ll_f1_aggregate;
  std::vector<CorrelationWindow> windows;
  // Per-checkpoint corpus means, one row per checkpoint.
  std::string csv;    // step,corpus_f1,mean_seminfo,mean_log_z
  std::string table;  // human-readable summary
};

// Decodes every sentence with every checkpoint (posterior MBR), scores
// sentence-F1 / SemInfo / log Z per checkpoint, and correlates as the
// report describes. Gold trees share the sentences' coordinates (the keep
// mask is all-true). Requires at least 3 checkpoints.
CorrelationReport correlation_study(
    const std::vector<CheckpointEntry>& checkpoints,
    const std::vector<std::vector<int>>& sentences,
    const std::vector<SpanScoreTable>& scores,
    const std::vector<GoldTree>& golds,
    const CorrelationConfig& cfg = {});

}  // namespace seminfo

#endif  // SEMINFO_EVAL_HPP

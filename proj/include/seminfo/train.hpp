#ifndef SEMINFO_TRAIN_HPP
#define SEMINFO_TRAIN_HPP

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "seminfo/maxsub.hpp"
#include "seminfo/pcfg.hpp"
#include "seminfo/tree.hpp"

namespace seminfo {

enum class PolicyKind { kTreecrfMbr, kPcfgPosterior };
enum class EntropyPlacement { kInsideAdvantage, kAdditive };

PolicyKind policy_from_string(const std::string& s);
std::string to_string(PolicyKind p);
EntropyPlacement placement_from_string(const std::string& s);
std::string to_string(EntropyPlacement p);

struct TrainingConfig {
  PolicyKind policy = PolicyKind::kTreecrfMbr;
  int samples_per_sentence = 8;  // K
  double entropy_coef = 0.01;    // beta
  EntropyPlacement entropy_placement = EntropyPlacement::kInsideAdvantage;
  double ll_weight = 1.0;
  double learning_rate = 0.05;
  int batch_size = 16;
  int max_steps = 0;
  std::uint64_t seed = 0;
  double clip_norm = 5.0;
};

// K >= 1, beta >= 0, learning_rate > 0, batch_size >= 1, clip_norm > 0.
void validate_config(const TrainingConfig& cfg);

// Total table score over the tree's spans; absent spans contribute 0.
// Throws if the tree and table lengths disagree.
double seminfo_reward(const ConstituentTree& tree, const SpanScoreTable& scores);

// Adam moments, kept alongside the grammar in checkpoints.
struct AdamState {
  std::vector<double> m_binary, v_binary, m_lexical, v_lexical;
  std::int64_t t = 0;
};
AdamState make_adam_state(const Grammar& g);

// Cross-step trainer state: optimizer moments plus the running reward mean
// that serves as the baseline when K = 1.
struct TrainerState {
  AdamState adam;
  double reward_sum = 0;
  std::int64_t reward_count = 0;

  double running_baseline() const {
    return reward_count == 0 ? 0.0 : reward_sum / reward_count;
  }
};

struct StepStats {
  double mean_log_z = 0;
  double mean_reward = 0;
  double baseline = 0;
  double entropy = 0;
  double grad_norm = 0;  // global L2 norm before clipping
  std::int64_t step = 0;
};

// One sentence's Monte-Carlo contribution: gradients of
//   ll_weight * log Z + (1/K) sum_k log P(t_k) * (R_k - Rbar [+ beta*H])
// with respect to every grammar logit. Under treecrf-mbr the policy is the
// span CRF with potentials equal to span posteriors and the gradient flows
// through those posteriors; under pcfg-posterior it is the grammar's own
// posterior over bracketings. Under the additive placement the bracket
// drops the beta*H shift and beta * grad H is added instead.
struct SentenceGradient {
  std::vector<double> binary, lexical;
  double log_z = 0;
  std::vector<double> rewards;  // one per sample
  double baseline = 0;          // the Rbar actually used
  double entropy = 0;           // per-sentence policy entropy value
};
SentenceGradient mc_policy_gradient(const Grammar& g,
                                    const std::vector<int>& sentence,
                                    const SpanScoreTable& scores,
                                    const TrainingConfig& cfg,
                                    std::mt19937_64& rng,
                                    double baseline_for_k1);

using TrainExample = std::pair<std::vector<int>, SpanScoreTable>;

// One REINFORCE step over the batch: average the per-sentence gradients,
// clip to cfg.clip_norm, apply a bias-corrected Adam ascent update.
// Unparsable sentences are skipped with a warning; a non-finite gradient
// aborts the step with a diagnostic.
std::pair<Grammar, StepStats> training_step(const Grammar& g,
                                            const std::vector<TrainExample>& batch,
                                            const TrainingConfig& cfg,
                                            std::mt19937_64& rng,
                                            TrainerState& state);

// Reference path that ascends ll_weight * mean log Z only. With beta = 0 and
// all-zero score tables, training_step matches it parameter-for-parameter.
std::pair<Grammar, StepStats> ll_only_step(const Grammar& g,
                                           const std::vector<std::vector<int>>& batch,
                                           const TrainingConfig& cfg,
                                           TrainerState& state);

// Exact-gradient oracle over the fully enumerated tree distribution:
//   J = ll_weight * log Z + sum_t P(t) R(t)  [+ beta * H under additive]
// with P(t) differentiable, so central differences of `objective` validate
// the gradients directly. The inside-advantage entropy shift moves every
// sample's advantage uniformly and cancels in expectation, so it does not
// appear here; the Monte-Carlo estimator converges to this gradient under
// either placement (with its beta * grad H term under additive).
struct ExactPolicyGradient {
  double objective = 0;
  std::vector<double> binary, lexical;
};
ExactPolicyGradient exact_policy_gradient(const Grammar& g,
                                          const std::vector<int>& sentence,
                                          const SpanScoreTable& scores,
                                          const TrainingConfig& cfg);

}  // namespace seminfo

#endif  // SEMINFO_TRAIN_HPP

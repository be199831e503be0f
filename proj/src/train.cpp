#include "seminfo/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "seminfo/treecrf.hpp"

namespace seminfo {
namespace {

namespace ad = seminfo::ad;

// The sampling distribution over bracketings, realized on the tape so the
// surrogate can differentiate through it. For treecrf-mbr the potentials
// are the span posteriors themselves, built as adjoint nodes of the inside
// chart (reverse accumulation recorded for further reverse passes).
struct PolicyContext {
  PolicyKind kind;
  const TapePcfg* tg;
  const TapeChart* chart;
  const std::vector<int>* sentence;
  TapeCrf crf;
  ad::Var crf_log_z = ad::kNoVar;
  SpanPotentialTable phi_plain;
};

PolicyContext make_policy(ad::Tape& tape, const TapePcfg& tg,
                          const TapeChart& chart,
                          const std::vector<int>& sentence, PolicyKind kind) {
  PolicyContext ctx{kind, &tg, &chart, &sentence, {}, ad::kNoVar, {}};
  if (kind != PolicyKind::kTreecrfMbr) return ctx;

  const int n = chart.n;
  const int nt = chart.num_nonterminals;
  std::vector<Span> spans;
  std::vector<ad::Var> cells;
  for (int len = 2; len <= n; ++len)
    for (int i = 0; i + len <= n; ++i) {
      spans.push_back({static_cast<std::uint32_t>(i),
                       static_cast<std::uint32_t>(i + len)});
      for (int a = 0; a < nt; ++a)
        cells.push_back(chart.beta_at(i, i + len, a));
    }
  const std::vector<ad::Var> adj = tape.gradient(chart.log_z, cells);

  ctx.crf = make_tape_crf(n);
  ctx.phi_plain.n = static_cast<std::uint32_t>(n);
  std::size_t q = 0;
  std::vector<ad::Var> terms;
  for (const Span& s : spans) {
    terms.clear();
    for (int a = 0; a < nt; ++a, ++q)
      if (adj[q] != ad::kNoVar) terms.push_back(adj[q]);
    const ad::Var phi =
        terms.empty() ? tape.constant(0.0) : tape.add_n(terms);
    ctx.crf.set(static_cast<int>(s.i), static_cast<int>(s.j), phi);
    ctx.phi_plain.phi[s] = tape.value(phi);
  }
  ctx.crf_log_z = tape_crf_partition(tape, ctx.crf);
  return ctx;
}

ad::Var policy_lp(ad::Tape& tape, const PolicyContext& ctx,
                  const ConstituentTree& t) {
  if (ctx.kind == PolicyKind::kTreecrfMbr)
    return tape_crf_tree_log_prob(tape, ctx.crf, ctx.crf_log_z, t);
  return tape.sub(tape_tree_log_joint(tape, *ctx.tg, *ctx.sentence, t),
                  ctx.chart->log_z);
}

// Detached per-sentence entropy value. The pcfg-posterior policy uses the
// derivation entropy log Z - sum_r E[c_r] log pi_r, the tractable upper
// surrogate for the entropy over bracketings.
double policy_entropy_value(ad::Tape& tape, const Grammar& g,
                            const PolicyContext& ctx) {
  if (ctx.kind == PolicyKind::kTreecrfMbr) return crf_entropy(ctx.phi_plain);
  const RuleCounts rc = expected_rule_counts(g, *ctx.sentence);
  const Grammar ng = normalize(g);
  double h = tape.value(ctx.chart->log_z);
  for (std::size_t r = 0; r < rc.binary.size(); ++r)
    if (rc.binary[r] > 0) h -= rc.binary[r] * ng.binary_logits[r];
  for (std::size_t r = 0; r < rc.lexical.size(); ++r)
    if (rc.lexical[r] > 0) h -= rc.lexical[r] * ng.lexical_logits[r];
  return std::max(h, 0.0);
}

// The same entropy as a differentiable node (additive placement only).
ad::Var policy_entropy_node(ad::Tape& tape, const PolicyContext& ctx) {
  if (ctx.kind == PolicyKind::kTreecrfMbr)
    return tape_crf_entropy(tape, ctx.crf, ctx.crf_log_z);
  std::vector<ad::Var> lps = ctx.tg->binary_lp;
  lps.insert(lps.end(), ctx.tg->lexical_lp.begin(), ctx.tg->lexical_lp.end());
  const std::vector<ad::Var> mu = tape.gradient(ctx.chart->log_z, lps);
  std::vector<ad::Var> terms;
  for (std::size_t r = 0; r < lps.size(); ++r)
    if (mu[r] != ad::kNoVar) terms.push_back(tape.mul(mu[r], lps[r]));
  return tape.sub(ctx.chart->log_z, tape.add_n(terms));
}

std::vector<ad::Var> logit_leaves(const TapePcfg& tg) {
  std::vector<ad::Var> leaves = tg.binary_leaf;
  leaves.insert(leaves.end(), tg.lexical_leaf.begin(), tg.lexical_leaf.end());
  return leaves;
}

void read_gradient(const ad::Tape& tape, const std::vector<ad::Var>& adj,
                   std::size_t nb, std::vector<double>& binary,
                   std::vector<double>& lexical) {
  binary.resize(nb);
  lexical.resize(adj.size() - nb);
  for (std::size_t i = 0; i < adj.size(); ++i) {
    const double v = adj[i] == ad::kNoVar ? 0.0 : tape.value(adj[i]);
    (i < nb ? binary[i] : lexical[i - nb]) = v;
  }
}

double global_norm(const std::vector<double>& b, const std::vector<double>& l) {
  double s = 0;
  for (double x : b) s += x * x;
  for (double x : l) s += x * x;
  return std::sqrt(s);
}

// Clip to cfg.clip_norm, then a bias-corrected Adam ascent update.
void apply_update(Grammar& g, AdamState& st, std::vector<double>& gb,
                  std::vector<double>& gl, const TrainingConfig& cfg,
                  double norm) {
  if (norm > cfg.clip_norm) {
    const double s = cfg.clip_norm / norm;
    for (double& x : gb) x *= s;
    for (double& x : gl) x *= s;
  }
  st.t += 1;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const double c1 = 1 - std::pow(kBeta1, static_cast<double>(st.t));
  const double c2 = 1 - std::pow(kBeta2, static_cast<double>(st.t));
  auto update = [&](std::vector<double>& theta, std::vector<double>& m,
                    std::vector<double>& v, const std::vector<double>& grad) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1 - kBeta2) * grad[i] * grad[i];
      theta[i] +=
          cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  };
  update(g.binary_logits, st.m_binary, st.v_binary, gb);
  update(g.lexical_logits, st.m_lexical, st.v_lexical, gl);
}

std::vector<std::vector<Span>> spans_over(std::uint32_t i, std::uint32_t j) {
  std::vector<std::vector<Span>> out;
  if (j - i == 1) {
    out.push_back({Span{i, j}});
    return out;
  }
  for (std::uint32_t k = i + 1; k < j; ++k)
    for (const auto& l : spans_over(i, k))
      for (const auto& r : spans_over(k, j)) {
        std::vector<Span> spans{Span{i, j}};
        spans.insert(spans.end(), l.begin(), l.end());
        spans.insert(spans.end(), r.begin(), r.end());
        out.push_back(std::move(spans));
      }
  return out;
}

std::vector<ConstituentTree> all_bracketings(std::uint32_t n) {
  std::vector<ConstituentTree> out;
  for (auto& spans : spans_over(0, n)) {
    ConstituentTree t;
    t.n = n;
    t.spans = std::move(spans);
    std::sort(t.spans.begin(), t.spans.end());
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

PolicyKind policy_from_string(const std::string& s) {
  if (s == "treecrf-mbr") return PolicyKind::kTreecrfMbr;
  if (s == "pcfg-posterior") return PolicyKind::kPcfgPosterior;
  throw std::invalid_argument("unknown policy: " + s);
}

std::string to_string(PolicyKind p) {
  return p == PolicyKind::kTreecrfMbr ? "treecrf-mbr" : "pcfg-posterior";
}

EntropyPlacement placement_from_string(const std::string& s) {
  if (s == "inside-advantage") return EntropyPlacement::kInsideAdvantage;
  if (s == "additive") return EntropyPlacement::kAdditive;
  throw std::invalid_argument("unknown entropy placement: " + s);
}

std::string to_string(EntropyPlacement p) {
  return p == EntropyPlacement::kInsideAdvantage ? "inside-advantage"
                                                 : "additive";
}

void validate_config(const TrainingConfig& cfg) {
  if (cfg.samples_per_sentence < 1)
    throw std::invalid_argument("config: samples_per_sentence must be >= 1");
  if (!(cfg.entropy_coef >= 0))
    throw std::invalid_argument("config: entropy_coef must be >= 0");
  if (!(cfg.learning_rate > 0))
    throw std::invalid_argument("config: learning_rate must be > 0");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("config: batch_size must be >= 1");
  if (!(cfg.clip_norm > 0))
    throw std::invalid_argument("config: clip_norm must be > 0");
}

double seminfo_reward(const ConstituentTree& tree,
                      const SpanScoreTable& scores) {
  if (tree.n != scores.n)
    throw std::invalid_argument("seminfo_reward: tree/table length mismatch");
  double r = 0;
  for (const Span& s : tree.spans) {
    const auto it = scores.scores.find(s);
    if (it != scores.scores.end()) r += it->second;
  }
  return r;
}

AdamState make_adam_state(const Grammar& g) {
  AdamState st;
  st.m_binary.assign(g.binary_logits.size(), 0);
  st.v_binary.assign(g.binary_logits.size(), 0);
  st.m_lexical.assign(g.lexical_logits.size(), 0);
  st.v_lexical.assign(g.lexical_logits.size(), 0);
  return st;
}

SentenceGradient mc_policy_gradient(const Grammar& g,
                                    const std::vector<int>& sentence,
                                    const SpanScoreTable& scores,
                                    const TrainingConfig& cfg,
                                    std::mt19937_64& rng,
                                    double baseline_for_k1) {
  validate_config(cfg);
  if (scores.n != sentence.size())
    throw std::invalid_argument("mc_policy_gradient: scores length mismatch");
  const int k = cfg.samples_per_sentence;

  ad::Tape tape;
  const TapePcfg tg = tape_grammar(tape, g);
  const TapeChart chart = tape_inside(tape, tg, sentence);
  if (!std::isfinite(tape.value(chart.log_z)))
    throw std::runtime_error("mc_policy_gradient: unparsable sentence");
  const PolicyContext ctx =
      make_policy(tape, tg, chart, sentence, cfg.policy);

  std::vector<ConstituentTree> samples;
  if (cfg.policy == PolicyKind::kTreecrfMbr) {
    samples = crf_sample(ctx.phi_plain, rng, k);
  } else {
    samples.reserve(k);
    for (int s = 0; s < k; ++s)
      samples.push_back(sample_tree_posterior(g, sentence, rng));
  }

  SentenceGradient out;
  out.rewards.reserve(k);
  double reward_mean = 0;
  for (const auto& t : samples) {
    out.rewards.push_back(seminfo_reward(t, scores));
    reward_mean += out.rewards.back();
  }
  reward_mean /= k;
  out.baseline = k >= 2 ? reward_mean : baseline_for_k1;
  out.entropy = policy_entropy_value(tape, g, ctx);
  out.log_z = tape.value(chart.log_z);

  const bool additive =
      cfg.entropy_placement == EntropyPlacement::kAdditive;
  std::vector<ad::Var> terms;
  terms.reserve(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const double w = (out.rewards[s] - out.baseline +
                      (additive ? 0.0 : cfg.entropy_coef * out.entropy)) /
                     k;
    terms.push_back(
        tape.mul(tape.constant(w), policy_lp(tape, ctx, samples[s])));
  }
  ad::Var obj = tape.add(tape.mul(tape.constant(cfg.ll_weight), chart.log_z),
                         tape.add_n(terms));
  if (additive)
    obj = tape.add(obj, tape.mul(tape.constant(cfg.entropy_coef),
                                 policy_entropy_node(tape, ctx)));

  const std::vector<ad::Var> leaves = logit_leaves(tg);
  const std::vector<ad::Var> adj = tape.gradient(obj, leaves);
  read_gradient(tape, adj, g.binary_logits.size(), out.binary, out.lexical);
  return out;
}

std::pair<Grammar, StepStats> training_step(
    const Grammar& g, const std::vector<TrainExample>& batch,
    const TrainingConfig& cfg, std::mt19937_64& rng, TrainerState& state) {
  validate_config(cfg);
  if (batch.empty())
    throw std::invalid_argument("training_step: empty batch");
  if (state.adam.t == 0 && state.adam.m_binary.empty())
    state.adam = make_adam_state(g);

  std::vector<double> acc_b(g.binary_logits.size(), 0);
  std::vector<double> acc_l(g.lexical_logits.size(), 0);
  StepStats stats;
  int used = 0;
  double reward_sum = 0, baseline_sum = 0, entropy_sum = 0, logz_sum = 0;
  std::int64_t reward_n = 0;
  const double k1_baseline = state.running_baseline();

  for (const auto& [sentence, scores] : batch) {
    if (sentence.empty() || !std::isfinite(inside(g, sentence).log_z)) {
      std::fprintf(stderr,
                   "[train] skipping unparsable sentence of length %zu\n",
                   sentence.size());
      continue;
    }
    const SentenceGradient sg =
        mc_policy_gradient(g, sentence, scores, cfg, rng, k1_baseline);
    for (std::size_t i = 0; i < acc_b.size(); ++i) acc_b[i] += sg.binary[i];
    for (std::size_t i = 0; i < acc_l.size(); ++i) acc_l[i] += sg.lexical[i];
    for (double r : sg.rewards) reward_sum += r;
    reward_n += static_cast<std::int64_t>(sg.rewards.size());
    baseline_sum += sg.baseline;
    entropy_sum += sg.entropy;
    logz_sum += sg.log_z;
    ++used;
  }
  if (used == 0)
    throw std::runtime_error(
        "training_step: every sentence in the batch was skipped");

  for (double& x : acc_b) x /= used;
  for (double& x : acc_l) x /= used;
  const double norm = global_norm(acc_b, acc_l);
  if (!std::isfinite(norm))
    throw std::runtime_error(
        "training_step: non-finite gradient at step " +
        std::to_string(state.adam.t + 1));

  stats.mean_log_z = logz_sum / used;
  stats.mean_reward = reward_sum / static_cast<double>(reward_n);
  stats.baseline = baseline_sum / used;
  stats.entropy = entropy_sum / used;
  stats.grad_norm = norm;

  Grammar out = g;
  apply_update(out, state.adam, acc_b, acc_l, cfg, norm);
  stats.step = state.adam.t;
  state.reward_sum += reward_sum;
  state.reward_count += reward_n;
  return {std::move(out), stats};
}

std::pair<Grammar, StepStats> ll_only_step(
    const Grammar& g, const std::vector<std::vector<int>>& batch,
    const TrainingConfig& cfg, TrainerState& state) {
  validate_config(cfg);
  if (batch.empty())
    throw std::invalid_argument("ll_only_step: empty batch");
  if (state.adam.t == 0 && state.adam.m_binary.empty())
    state.adam = make_adam_state(g);

  std::vector<double> acc_b(g.binary_logits.size(), 0);
  std::vector<double> acc_l(g.lexical_logits.size(), 0);
  StepStats stats;
  int used = 0;
  double logz_sum = 0;
  for (const auto& sentence : batch) {
    if (sentence.empty() || !std::isfinite(inside(g, sentence).log_z)) {
      std::fprintf(stderr,
                   "[train] skipping unparsable sentence of length %zu\n",
                   sentence.size());
      continue;
    }
    ad::Tape tape;
    const TapePcfg tg = tape_grammar(tape, g);
    const TapeChart chart = tape_inside(tape, tg, sentence);
    const ad::Var obj =
        tape.mul(tape.constant(cfg.ll_weight), chart.log_z);
    const std::vector<ad::Var> leaves = logit_leaves(tg);
    const std::vector<ad::Var> adj = tape.gradient(obj, leaves);
    std::vector<double> gb, gl;
    read_gradient(tape, adj, g.binary_logits.size(), gb, gl);
    for (std::size_t i = 0; i < acc_b.size(); ++i) acc_b[i] += gb[i];
    for (std::size_t i = 0; i < acc_l.size(); ++i) acc_l[i] += gl[i];
    logz_sum += tape.value(chart.log_z);
    ++used;
  }
  if (used == 0)
    throw std::runtime_error(
        "ll_only_step: every sentence in the batch was skipped");

  for (double& x : acc_b) x /= used;
  for (double& x : acc_l) x /= used;
  const double norm = global_norm(acc_b, acc_l);
  if (!std::isfinite(norm))
    throw std::runtime_error("ll_only_step: non-finite gradient");

  stats.mean_log_z = logz_sum / used;
  stats.grad_norm = norm;
  Grammar out = g;
  apply_update(out, state.adam, acc_b, acc_l, cfg, norm);
  stats.step = state.adam.t;
  return {std::move(out), stats};
}

ExactPolicyGradient exact_policy_gradient(const Grammar& g,
                                          const std::vector<int>& sentence,
                                          const SpanScoreTable& scores,
                                          const TrainingConfig& cfg) {
  validate_config(cfg);
  if (sentence.empty() || sentence.size() > 8)
    throw std::invalid_argument(
        "exact_policy_gradient: sentence length must be in [1, 8]");
  if (scores.n != sentence.size())
    throw std::invalid_argument(
        "exact_policy_gradient: scores length mismatch");

  ad::Tape tape;
  const TapePcfg tg = tape_grammar(tape, g);
  const TapeChart chart = tape_inside(tape, tg, sentence);
  if (!std::isfinite(tape.value(chart.log_z)))
    throw std::runtime_error("exact_policy_gradient: unparsable sentence");
  const PolicyContext ctx =
      make_policy(tape, tg, chart, sentence, cfg.policy);

  std::vector<ad::Var> terms;
  for (const ConstituentTree& t :
       all_bracketings(static_cast<std::uint32_t>(sentence.size()))) {
    const ad::Var p = tape.exp(policy_lp(tape, ctx, t));
    terms.push_back(tape.mul(p, tape.constant(seminfo_reward(t, scores))));
  }
  ad::Var obj = tape.add(tape.mul(tape.constant(cfg.ll_weight), chart.log_z),
                         tape.add_n(terms));
  if (cfg.entropy_placement == EntropyPlacement::kAdditive)
    obj = tape.add(obj, tape.mul(tape.constant(cfg.entropy_coef),
                                 policy_entropy_node(tape, ctx)));

  ExactPolicyGradient out;
  out.objective = tape.value(obj);
  const std::vector<ad::Var> leaves = logit_leaves(tg);
  const std::vector<ad::Var> adj = tape.gradient(obj, leaves);
  read_gradient(tape, adj, g.binary_logits.size(), out.binary, out.lexical);
  return out;
}

}  // namespace seminfo

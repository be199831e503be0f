#include "seminfo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "seminfo/parse.hpp"
#include "seminfo/train.hpp"

namespace seminfo {
namespace {

// Prefix-count remap: kept_before[i] = number of kept positions in [0, i).
std::vector<std::uint32_t> kept_before(const std::vector<bool>& keep) {
  std::vector<std::uint32_t> out(keep.size() + 1, 0);
  for (std::size_t i = 0; i < keep.size(); ++i)
    out[i + 1] = out[i] + (keep[i] ? 1 : 0);
  return out;
}

// Gold spans in kept coordinates, trivial spans dropped.
std::set<Span> filtered_gold(const GoldTree& gold,
                             const std::vector<std::uint32_t>& prefix,
                             std::uint32_t m) {
  std::set<Span> out;
  for (const LabeledSpan& ls : gold.labeled_spans) {
    const std::uint32_t a = prefix[ls.span.i];
    const std::uint32_t b = prefix[ls.span.j];
    if (b - a >= 2 && b - a < m) out.insert({a, b});
  }
  return out;
}

std::set<Span> filtered_pred(const ConstituentTree& pred) {
  std::set<Span> out;
  for (const Span& s : pred.spans)
    if (s.j - s.i >= 2 && s.j - s.i < pred.n) out.insert(s);
  return out;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  for (std::size_t a = 0; a < n;) {
    std::size_t b = a;
    while (b + 1 < n && v[idx[b + 1]] == v[idx[a]]) ++b;
    const double rank = (static_cast<double>(a) + static_cast<double>(b)) / 2 + 1;
    for (std::size_t k = a; k <= b; ++k) r[idx[k]] = rank;
    a = b + 1;
  }
  return r;
}

// Regularized incomplete beta via Lentz's continued fraction.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14, kTiny = 1e-300;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < kEps) break;
  }
  return h;
}

double betai(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                             std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x));
  if (x < (a + 1) / (a + b + 2)) return bt * betacf(a, b, x) / a;
  return 1 - bt * betacf(b, a, 1 - x) / b;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double var_of(const std::vector<double>& v, double mean) {
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / (v.size() - 1);
}

}  // namespace

std::vector<bool> keep_mask(const NormalizedSentence& s) {
  std::vector<bool> keep(s.original_tokens.size(), false);
  for (std::uint32_t k : s.index_map) keep[k] = true;
  return keep;
}

std::optional<double> sentence_f1(const ConstituentTree& pred,
                                  const GoldTree& gold,
                                  const std::vector<bool>& keep) {
  if (keep.size() != gold.n)
    throw std::invalid_argument("sentence_f1: mask/gold length mismatch");
  const std::vector<std::uint32_t> prefix = kept_before(keep);
  const std::uint32_t m = prefix.back();
  if (pred.n != m)
    throw std::invalid_argument("sentence_f1: prediction/mask kept-count mismatch");
  for (const LabeledSpan& ls : gold.labeled_spans)
    if (ls.span.j > gold.n || ls.span.i >= ls.span.j)
      throw std::invalid_argument("sentence_f1: gold span out of bounds");

  if (m <= 2) return std::nullopt;
  const std::set<Span> gold_set = filtered_gold(gold, prefix, m);
  if (gold_set.empty()) return std::nullopt;
  const std::set<Span> pred_set = filtered_pred(pred);

  std::size_t inter = 0;
  for (const Span& s : pred_set) inter += gold_set.count(s);
  const double p =
      pred_set.empty() ? 0.0 : static_cast<double>(inter) / pred_set.size();
  const double r = static_cast<double>(inter) / gold_set.size();
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

double corpus_f1(const std::vector<std::optional<double>>& per_sentence) {
  double sum = 0;
  std::size_t used = 0;
  for (const auto& f1 : per_sentence)
    if (f1.has_value()) {
      sum += *f1;
      ++used;
    }
  if (used == 0)
    throw std::runtime_error("corpus_f1: every sentence was skipped");
  return sum / static_cast<double>(used);
}

std::map<std::string, LabelRecall> label_recall(
    const std::vector<ConstituentTree>& preds,
    const std::vector<GoldTree>& golds,
    const std::vector<std::vector<bool>>& keeps,
    const std::vector<std::string>& labels) {
  if (preds.size() != golds.size() || preds.size() != keeps.size())
    throw std::invalid_argument("label_recall: corpus sizes disagree");
  std::map<std::string, LabelRecall> out;
  std::map<std::string, std::int64_t> hits;
  for (const std::string& l : labels) {
    out[l] = {};
    hits[l] = 0;
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (keeps[i].size() != golds[i].n)
      throw std::invalid_argument("label_recall: mask/gold length mismatch");
    const std::vector<std::uint32_t> prefix = kept_before(keeps[i]);
    const std::uint32_t m = prefix.back();
    if (preds[i].n != m)
      throw std::invalid_argument(
          "label_recall: prediction/mask kept-count mismatch");
    const std::set<Span> pred_set = filtered_pred(preds[i]);
    for (const LabeledSpan& ls : golds[i].labeled_spans) {
      const auto it = out.find(ls.label);
      if (it == out.end()) continue;
      const std::uint32_t a = prefix[ls.span.i];
      const std::uint32_t b = prefix[ls.span.j];
      if (b - a < 2 || b - a >= m) continue;
      it->second.support += 1;
      hits[ls.label] += pred_set.count({a, b});
    }
  }
  for (auto& [label, lr] : out)
    lr.recall = lr.support == 0
                    ? 0.0
                    : static_cast<double>(hits[label]) / lr.support;
  return out;
}

std::optional<double> spearman(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length sequences");
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double mx = mean_of(rx), my = mean_of(ry);
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0 || dy == 0) return std::nullopt;
  return num / std::sqrt(dx * dy);
}

double fisher_aggregate(const std::vector<std::optional<double>>& rhos) {
  double sum = 0;
  std::size_t used = 0;
  for (const auto& rho : rhos) {
    if (!rho.has_value()) continue;
    double r = *rho;
    if (std::isnan(r))
      throw std::invalid_argument("fisher_aggregate: NaN correlation");
    if (std::fabs(r) >= 1) {
      std::fprintf(stderr,
                   "[eval] clipping correlation %g to the open interval\n", r);
      r = std::copysign(1 - 1e-7, r);
    }
    sum += std::atanh(r);
    ++used;
  }
  if (used == 0)
    throw std::runtime_error("fisher_aggregate: no defined correlations");
  return std::tanh(sum / static_cast<double>(used));
}

TTestResult welch_t_test(const std::vector<double>& xs,
                         const std::vector<double>& ys) {
  if (xs.size() < 2 || ys.size() < 2)
    throw std::invalid_argument("welch_t_test: need two samples of size >= 2");
  const double mx = mean_of(xs), my = mean_of(ys);
  const double vx = var_of(xs, mx) / xs.size();
  const double vy = var_of(ys, my) / ys.size();
  TTestResult out;
  if (vx + vy == 0) {
    out.t = 0;
    out.df = static_cast<double>(xs.size() + ys.size() - 2);
    out.p_value = 1;
    return out;
  }
  out.t = (mx - my) / std::sqrt(vx + vy);
  out.df = (vx + vy) * (vx + vy) /
           (vx * vx / (xs.size() - 1) + vy * vy / (ys.size() - 1));
  out.p_value = betai(out.df / 2, 0.5, out.df / (out.df + out.t * out.t));
  return out;
}

CorrelationReport correlation_study(
    const std::vector<CheckpointEntry>& checkpoints,
    const std::vector<std::vector<int>>& sentences,
    const std::vector<SpanScoreTable>& scores,
    const std::vector<GoldTree>& golds, const CorrelationConfig& cfg) {
  if (checkpoints.size() < 3)
    throw std::invalid_argument("correlation_study: need >= 3 checkpoints");
  if (sentences.size() != scores.size() || sentences.size() != golds.size() ||
      sentences.empty())
    throw std::invalid_argument("correlation_study: corpus sizes disagree");

  const std::size_t nc = checkpoints.size(), ns = sentences.size();
  // Per checkpoint x sentence: F1 (skip-marker possible), SemInfo, log Z.
  std::vector<std::vector<std::optional<double>>> f1(nc);
  std::vector<std::vector<double>> si(nc, std::vector<double>(ns, 0));
  std::vector<std::vector<double>> ll(nc, std::vector<double>(ns, 0));
  for (std::size_t c = 0; c < nc; ++c) {
    f1[c].resize(ns);
    for (std::size_t i = 0; i < ns; ++i) {
      const std::vector<bool> keep(sentences[i].size(), true);
      const ConstituentTree t =
          parse_mbr(checkpoints[c].grammar, sentences[i]);
      f1[c][i] = sentence_f1(t, golds[i], keep);
      si[c][i] = seminfo_reward(t, scores[i]);
      ll[c][i] = inside(checkpoints[c].grammar, sentences[i]).log_z;
    }
  }

  CorrelationReport report;
  report.seminfo_f1_rhos.resize(ns);
  report.ll_f1_rhos.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    std::vector<double> f, s, l;
    bool complete = true;
    for (std::size_t c = 0; c < nc; ++c) {
      if (!f1[c][i].has_value()) {
        complete = false;
        break;
      }
      f.push_back(*f1[c][i]);
      s.push_back(si[c][i]);
      l.push_back(ll[c][i]);
    }
    if (!complete) continue;
    report.seminfo_f1_rhos[i] = spearman(f, s);
    report.ll_f1_rhos[i] = spearman(f, l);
  }
  auto aggregate = [](const std::vector<std::optional<double>>& rhos)
      -> std::optional<double> {
    for (const auto& r : rhos)
      if (r.has_value()) return fisher_aggregate(rhos);
    return std::nullopt;
  };
  report.seminfo_f1_aggregate = aggregate(report.seminfo_f1_rhos);
  report.ll_f1_aggregate = aggregate(report.ll_f1_rhos);

  // Per-checkpoint corpus means.
  std::vector<double> mean_f1(nc), mean_si(nc), mean_ll(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    mean_f1[c] = corpus_f1(f1[c]);
    mean_si[c] = mean_of(si[c]);
    mean_ll[c] = mean_of(ll[c]);
  }

  std::vector<std::pair<std::int64_t, std::int64_t>> windows = cfg.windows;
  if (windows.empty()) {
    std::int64_t lo = checkpoints.front().step, hi = checkpoints.front().step;
    for (const auto& c : checkpoints) {
      lo = std::min(lo, c.step);
      hi = std::max(hi, c.step);
    }
    windows.push_back({lo, hi});
  }
  for (const auto& [lo, hi] : windows) {
    CorrelationWindow w;
    w.lo = lo;
    w.hi = hi;
    std::vector<double> f, s, l;
    for (std::size_t c = 0; c < nc; ++c)
      if (checkpoints[c].step >= lo && checkpoints[c].step <= hi) {
        f.push_back(mean_f1[c]);
        s.push_back(mean_si[c]);
        l.push_back(mean_ll[c]);
      }
    if (f.size() >= 2) {
      w.seminfo_f1 = spearman(f, s);
      w.ll_f1 = spearman(f, l);
    }
    report.windows.push_back(w);
  }

  char buf[256];
  report.csv = "step,corpus_f1,mean_seminfo,mean_log_z\n";
  for (std::size_t c = 0; c < nc; ++c) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(checkpoints[c].step), mean_f1[c],
                  mean_si[c], mean_ll[c]);
    report.csv += buf;
  }

  auto fmt_opt = [](const std::optional<double>& v) {
    if (!v.has_value()) return std::string("undefined");
    char b[64];
    std::snprintf(b, sizeof b, "%.4f", *v);
    return std::string(b);
  };
  std::snprintf(buf, sizeof buf,
                "checkpoints: %zu  sentences: %zu\n"
                "sentence-level Spearman vs F1: seminfo %s, log-likelihood %s\n",
                nc, ns, fmt_opt(report.seminfo_f1_aggregate).c_str(),
                fmt_opt(report.ll_f1_aggregate).c_str());
  report.table = buf;
  for (const CorrelationWindow& w : report.windows) {
    std::snprintf(buf, sizeof buf,
                  "window [%lld, %lld]: seminfo %s, log-likelihood %s\n",
                  static_cast<long long>(w.lo), static_cast<long long>(w.hi),
                  fmt_opt(w.seminfo_f1).c_str(), fmt_opt(w.ll_f1).c_str());
    report.table += buf;
  }
  return report;
}

}  // namespace seminfo

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hsreg/errors.hpp"
#include "hsreg/model.hpp"

// Posterior summarization, credible-interval selection, evaluation metrics
// and the Gelman-Rubin convergence diagnostic. Pure functions over immutable
// draw matrices.

namespace hsreg {

struct CredibleInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
};

// Pinned quantile rule: linear interpolation at position 1 + q (m - 1)
// among the sorted values.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw config_error("quantile of empty sample");
  const std::size_t m = sorted.size();
  if (m == 1) return sorted[0];
  const double pos = q * static_cast<double>(m - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= m) return sorted[m - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

inline double median_of(std::span<const double> values) {
  if (values.empty()) throw config_error("median of empty sample");
  std::vector<double> tmp(values.begin(), values.end());
  std::sort(tmp.begin(), tmp.end());
  const std::size_t m = tmp.size();
  return m % 2 == 1 ? tmp[m / 2] : 0.5 * (tmp[m / 2 - 1] + tmp[m / 2]);
}

// Columnwise posterior medians of the retained beta draws.
inline std::vector<double> posterior_median(const PosteriorDraws& draws) {
  if (draws.m() < 1) throw config_error("posterior_median: no retained draws");
  std::vector<double> med(draws.p());
  std::vector<double> col(draws.m());
  for (std::size_t j = 0; j < draws.p(); ++j) {
    for (std::size_t i = 0; i < draws.m(); ++i) col[i] = draws.beta(i, j);
    med[j] = median_of(col);
  }
  return med;
}

// Equal-tailed interval at quantiles (1-level)/2 and 1-(1-level)/2.
inline CredibleInterval credible_interval(std::span<const double> draws_col,
                                          double level) {
  if (draws_col.size() < 2) {
    throw config_error("credible_interval: need at least two draws");
  }
  if (!(level > 0.0) || !(level < 1.0)) {
    throw config_error("credible_interval: level must lie in (0, 1)");
  }
  std::vector<double> sorted(draws_col.begin(), draws_col.end());
  std::sort(sorted.begin(), sorted.end());
  const double alpha = 0.5 * (1.0 - level);
  return {quantile_sorted(sorted, alpha), quantile_sorted(sorted, 1.0 - alpha),
          level};
}

// A coefficient is selected iff its interval excludes zero; intervals whose
// boundary touches zero do not select.
inline std::vector<bool> select_by_interval(
    const std::vector<CredibleInterval>& intervals) {
  std::vector<bool> selected(intervals.size());
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    selected[j] = intervals[j].lo > 0.0 || intervals[j].hi < 0.0;
  }
  return selected;
}

struct ConfusionScores {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double f1 = 0.0;
  double mcc = 0.0;
};

// F1 = 2TP/(2TP+FP+FN), MCC via the standard product form; both fall back
// to 0 when their denominator vanishes.
inline ConfusionScores confusion_and_scores(const std::vector<bool>& selected,
                                            const std::vector<bool>& truth_nonzero) {
  if (selected.size() != truth_nonzero.size()) {
    throw shape_error("confusion_and_scores: length mismatch");
  }
  ConfusionScores out;
  for (std::size_t j = 0; j < selected.size(); ++j) {
    if (selected[j] && truth_nonzero[j]) ++out.tp;
    else if (selected[j] && !truth_nonzero[j]) ++out.fp;
    else if (!selected[j] && truth_nonzero[j]) ++out.fn;
    else ++out.tn;
  }
  const double f1_den = 2.0 * out.tp + out.fp + out.fn;
  out.f1 = f1_den > 0.0 ? 2.0 * out.tp / f1_den : 0.0;
  const double prod = static_cast<double>(out.tp + out.fp) *
                      static_cast<double>(out.tp + out.fn) *
                      static_cast<double>(out.tn + out.fp) *
                      static_cast<double>(out.tn + out.fn);
  out.mcc = prod > 0.0
                ? (static_cast<double>(out.tp) * out.tn -
                   static_cast<double>(out.fp) * out.fn) / std::sqrt(prod)
                : 0.0;
  return out;
}

inline double l1_error(std::span<const double> estimate,
                       std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw shape_error("l1_error: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < estimate.size(); ++j) {
    s += std::abs(estimate[j] - truth[j]);
  }
  return s;
}

// covered_j <=> lo_j <= truth_j <= hi_j (closed endpoints)
inline std::vector<bool> coverage(const std::vector<CredibleInterval>& intervals,
                                  std::span<const double> truth) {
  if (intervals.size() != truth.size()) throw shape_error("coverage: length mismatch");
  std::vector<bool> covered(intervals.size());
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    covered[j] = intervals[j].lo <= truth[j] && truth[j] <= intervals[j].hi;
  }
  return covered;
}

// Gelman-Rubin potential scale reduction factor (1992 form, no
// degrees-of-freedom correction):
//   W     = mean within-chain variance
//   B/n   = between-chain variance of the chain means
//   Vhat  = ((n-1)/n) W + B/n,   PSRF = sqrt(Vhat / W)
// Returns +infinity when the chains are internally constant but disagree.
inline double psrf(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw config_error("psrf: need at least two chains");
  const std::size_t n = chains[0].size();
  if (n < 2) throw config_error("psrf: chains must have length >= 2");
  for (const auto& c : chains) {
    if (c.size() != n) throw shape_error("psrf: chains must share one length");
  }
  const double nd = static_cast<double>(n);
  const std::size_t m = chains.size();

  double w = 0.0;
  std::vector<double> means(m);
  for (std::size_t c = 0; c < m; ++c) {
    double mean = 0.0;
    for (double v : chains[c]) mean += v;
    mean /= nd;
    means[c] = mean;
    double ss = 0.0;
    for (double v : chains[c]) ss += (v - mean) * (v - mean);
    w += ss / (nd - 1.0);
  }
  w /= static_cast<double>(m);

  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= static_cast<double>(m);
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= static_cast<double>(m - 1);

  if (w == 0.0) {
    return b_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  const double vhat = (nd - 1.0) / nd * w + b_over_n;
  return std::sqrt(vhat / w);
}

inline double mad(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) throw shape_error("mad: length mismatch");
  if (pred.empty()) throw shape_error("mad: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    s += std::abs(pred[i] - actual[i]);
  }
  return s / static_cast<double>(pred.size());
}

// Per-fit or per-replicate selection summary.
struct SelectionReport {
  std::vector<CredibleInterval> intervals;
  std::vector<bool> selected;
  ConfusionScores scores;
  double l1 = 0.0;
  std::vector<bool> covered;  // empty when truth unknown
};

inline SelectionReport make_selection_report(const PosteriorDraws& draws,
                                             double level,
                                             const std::vector<double>* truth,
                                             const std::vector<bool>* truth_nonzero) {
  SelectionReport rep;
  rep.intervals.reserve(draws.p());
  std::vector<double> col(draws.m());
  for (std::size_t j = 0; j < draws.p(); ++j) {
    for (std::size_t i = 0; i < draws.m(); ++i) col[i] = draws.beta(i, j);
    rep.intervals.push_back(credible_interval(col, level));
  }
  rep.selected = select_by_interval(rep.intervals);
  if (truth_nonzero) {
    rep.scores = confusion_and_scores(rep.selected, *truth_nonzero);
  }
  if (truth) {
    rep.l1 = l1_error(posterior_median(draws), *truth);
    rep.covered = coverage(rep.intervals, *truth);
  }
  return rep;
}

}  // namespace hsreg

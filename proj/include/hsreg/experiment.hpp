#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "hsreg/csv.hpp"
#include "hsreg/errors.hpp"
#include "hsreg/gibbs.hpp"
#include "hsreg/inference.hpp"
#include "hsreg/model.hpp"
#include "hsreg/simulate.hpp"
#include "hsreg/version.hpp"

// Experiment orchestration: single fits, replicate batches, coverage
// studies, multi-split prediction and expression-matrix preprocessing.
// Replicates fan out over a worker pool; results are collected by index so
// parallel and sequential execution emit identical numbers.

namespace hsreg {

struct MethodName {
  Likelihood likelihood;
  Prior prior;
};

// Table of the six methods: rbhs, rbhs+, rbrhs and their Gaussian
// counterparts bhs, bhs+, brhs.
inline MethodName method_from_string(const std::string& name) {
  if (name == "rbhs") return {Likelihood::RobustLaplace, Prior::Horseshoe};
  if (name == "rbhs+") return {Likelihood::RobustLaplace, Prior::HorseshoePlus};
  if (name == "rbrhs") return {Likelihood::RobustLaplace, Prior::RegularizedHorseshoe};
  if (name == "bhs") return {Likelihood::Gaussian, Prior::Horseshoe};
  if (name == "bhs+") return {Likelihood::Gaussian, Prior::HorseshoePlus};
  if (name == "brhs") return {Likelihood::Gaussian, Prior::RegularizedHorseshoe};
  throw config_error("unknown method '" + name +
                     "' (expected rbhs, rbhs+, rbrhs, bhs, bhs+ or brhs)");
}

inline std::string method_to_string(Likelihood lik, Prior prior) {
  std::string s = lik == Likelihood::RobustLaplace ? "rbhs" : "bhs";
  if (prior == Prior::HorseshoePlus) s += "+";
  if (prior == Prior::RegularizedHorseshoe) {
    s = lik == Likelihood::RobustLaplace ? "rbrhs" : "brhs";
  }
  return s;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Index-parallel loop. Worker threads pull indices from a shared counter;
// any exception is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, count ? count : 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// single fit

struct FitOptions {
  std::size_t chains = 1;
  double level = 0.95;
  bool standardize_x = false;
  std::uint64_t fit_index = 0;  // stream-space slot for this fit's chains
  unsigned threads = 1;         // chains fan out over this many workers
};

struct FitResult {
  PosteriorDraws pooled;               // all chains concatenated
  std::vector<PosteriorDraws> chains;  // per-chain draws
  std::vector<double> beta_median;
  double beta0_median = 0.0;
  std::vector<CredibleInterval> intervals;
  std::vector<bool> selected;
  std::vector<double> psrf_beta;  // empty unless chains >= 2
  double elapsed_seconds = 0.0;
};

namespace detail {

struct Standardization {
  std::vector<double> mean, sd;
};

inline Standardization standardize_columns(Dataset& data) {
  Standardization st;
  st.mean.resize(data.p());
  st.sd.resize(data.p());
  const double n = static_cast<double>(data.n());
  for (std::size_t j = 0; j < data.p(); ++j) {
    double mu = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) mu += data.X(i, j);
    mu /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      ss += (data.X(i, j) - mu) * (data.X(i, j) - mu);
    }
    double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) sd = 1.0;  // constant column left centered only
    st.mean[j] = mu;
    st.sd[j] = sd;
    for (std::size_t i = 0; i < data.n(); ++i) {
      data.X(i, j) = (data.X(i, j) - mu) / sd;
    }
  }
  return st;
}

// Map draws fitted on standardized X back to the original scale:
//   beta_j -> beta_j / sd_j,  beta0 -> beta0 - sum_j beta_j mean_j / sd_j
inline void destandardize_draws(PosteriorDraws& draws, const Standardization& st) {
  for (std::size_t i = 0; i < draws.m(); ++i) {
    double shift = 0.0;
    for (std::size_t j = 0; j < draws.p(); ++j) {
      const double b = draws.beta(i, j) / st.sd[j];
      draws.beta(i, j) = b;
      shift += b * st.mean[j];
    }
    draws.beta0[i] -= shift;
  }
}

}  // namespace detail

inline FitResult fit_dataset(const SamplerSpec& spec, const Dataset& data,
                             const FitOptions& opts = {}) {
  if (opts.chains < 1) throw config_error("chains must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  Dataset working = data;
  detail::Standardization std_info;
  if (opts.standardize_x) std_info = detail::standardize_columns(working);

  FitResult result;
  result.chains.resize(opts.chains);
  parallel_for(opts.chains, opts.threads, [&](std::size_t c) {
    result.chains[c] = run_chain(spec, working, stream_for_chain(opts.fit_index, c));
    if (opts.standardize_x) {
      detail::destandardize_draws(result.chains[c], std_info);
    }
  });

  // pool chains for inference
  const std::size_t m_each = result.chains[0].m();
  PosteriorDraws pooled;
  pooled.beta = Matrix(m_each * opts.chains, data.p());
  for (std::size_t c = 0; c < opts.chains; ++c) {
    const auto& ch = result.chains[c];
    pooled.beta0.insert(pooled.beta0.end(), ch.beta0.begin(), ch.beta0.end());
    pooled.scale_trace.insert(pooled.scale_trace.end(), ch.scale_trace.begin(),
                              ch.scale_trace.end());
    pooled.lambda2_trace.insert(pooled.lambda2_trace.end(),
                                ch.lambda2_trace.begin(),
                                ch.lambda2_trace.end());
    for (std::size_t i = 0; i < m_each; ++i) {
      std::copy(ch.beta.row(i).begin(), ch.beta.row(i).end(),
                pooled.beta.row(c * m_each + i).begin());
    }
  }

  result.beta_median = posterior_median(pooled);
  result.beta0_median = median_of(pooled.beta0);
  result.intervals.reserve(data.p());
  std::vector<double> col(pooled.m());
  for (std::size_t j = 0; j < data.p(); ++j) {
    for (std::size_t i = 0; i < pooled.m(); ++i) col[i] = pooled.beta(i, j);
    result.intervals.push_back(credible_interval(col, opts.level));
  }
  result.selected = select_by_interval(result.intervals);

  if (opts.chains >= 2) {
    result.psrf_beta.resize(data.p());
    std::vector<std::vector<double>> chains_j(opts.chains);
    for (std::size_t j = 0; j < data.p(); ++j) {
      for (std::size_t c = 0; c < opts.chains; ++c) {
        chains_j[c].resize(m_each);
        for (std::size_t i = 0; i < m_each; ++i) {
          chains_j[c][i] = result.chains[c].beta(i, j);
        }
      }
      result.psrf_beta[j] = psrf(chains_j);
    }
  }

  result.pooled = std::move(pooled);
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

// ---------------------------------------------------------------------------
// replicate batches

struct ReplicateRow {
  std::size_t replicate = 0;
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double f1 = 0.0, mcc = 0.0, l1 = 0.0;
};

struct ReplicateSummary {
  std::vector<ReplicateRow> rows;
  ReplicateRow mean_row;  // counts hold rounded means; use means vector below
  std::vector<double> means;  // tp, fp, f1, mcc, l1
  std::vector<double> sds;
};

inline ReplicateSummary run_replicates(const SamplerSpec& spec,
                                       const SimDesign& design,
                                       std::size_t replicates, double level,
                                       unsigned threads) {
  if (replicates < 1) throw config_error("replicates must be >= 1");
  ReplicateSummary summary;
  summary.rows.resize(replicates);

  parallel_for(replicates, threads, [&](std::size_t r) {
    SimDesign rep_design = design;
    rep_design.replicate_id = r;
    const SimulatedData sim = gen_dataset(rep_design, spec.seed);
    const PosteriorDraws draws = run_chain(spec, sim.data, stream_for_chain(r));
    const SelectionReport rep = make_selection_report(
        draws, level, &sim.truth.beta, &sim.truth.nonzero);
    ReplicateRow row;
    row.replicate = r;
    row.tp = rep.scores.tp;
    row.fp = rep.scores.fp;
    row.fn = rep.scores.fn;
    row.tn = rep.scores.tn;
    row.f1 = rep.scores.f1;
    row.mcc = rep.scores.mcc;
    row.l1 = rep.l1;
    summary.rows[r] = row;
  });

  const double nrep = static_cast<double>(replicates);
  auto accumulate = [&](auto&& get) {
    double mean = 0.0;
    for (const auto& row : summary.rows) mean += get(row);
    mean /= nrep;
    double ss = 0.0;
    for (const auto& row : summary.rows) {
      ss += (get(row) - mean) * (get(row) - mean);
    }
    const double sd = replicates > 1 ? std::sqrt(ss / (nrep - 1.0)) : 0.0;
    summary.means.push_back(mean);
    summary.sds.push_back(sd);
  };
  accumulate([](const ReplicateRow& r) { return static_cast<double>(r.tp); });
  accumulate([](const ReplicateRow& r) { return static_cast<double>(r.fp); });
  accumulate([](const ReplicateRow& r) { return r.f1; });
  accumulate([](const ReplicateRow& r) { return r.mcc; });
  accumulate([](const ReplicateRow& r) { return r.l1; });
  return summary;
}

// ---------------------------------------------------------------------------
// coverage study (inference scheme)

struct CoverageSummary {
  // per nonzero coefficient: empirical coverage and average interval length
  std::vector<double> nonzero_coverage;
  std::vector<double> nonzero_length;
  // zero block, pooled over coefficients and replicates
  double zero_coverage = 0.0;
  double zero_length_pooled = 0.0;
  // zero block, per-coefficient averages then averaged across coefficients
  double zero_length_percoef = 0.0;
  std::size_t replicates = 0;
};

inline CoverageSummary run_coverage(const SamplerSpec& spec,
                                    const SimDesign& design,
                                    std::size_t replicates, double level,
                                    unsigned threads) {
  if (design.scheme != CoeffScheme::Inference3) {
    throw config_error("coverage study requires the inference coefficient scheme");
  }
  if (replicates < 1) throw config_error("replicates must be >= 1");

  const std::size_t p = design.p;
  const std::size_t n_signal = 3;
  std::vector<std::vector<double>> cover(replicates);
  std::vector<std::vector<double>> length(replicates);

  parallel_for(replicates, threads, [&](std::size_t r) {
    SimDesign rep_design = design;
    rep_design.replicate_id = r;
    const SimulatedData sim = gen_dataset(rep_design, spec.seed);
    const PosteriorDraws draws = run_chain(spec, sim.data, stream_for_chain(r));
    const SelectionReport rep =
        make_selection_report(draws, level, &sim.truth.beta, &sim.truth.nonzero);
    cover[r].resize(p);
    length[r].resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      cover[r][j] = rep.covered[j] ? 1.0 : 0.0;
      length[r][j] = rep.intervals[j].hi - rep.intervals[j].lo;
    }
  });

  CoverageSummary out;
  out.replicates = replicates;
  out.nonzero_coverage.assign(n_signal, 0.0);
  out.nonzero_length.assign(n_signal, 0.0);
  const double nrep = static_cast<double>(replicates);
  for (std::size_t j = 0; j < n_signal; ++j) {
    for (std::size_t r = 0; r < replicates; ++r) {
      out.nonzero_coverage[j] += cover[r][j];
      out.nonzero_length[j] += length[r][j];
    }
    out.nonzero_coverage[j] /= nrep;
    out.nonzero_length[j] /= nrep;
  }
  const std::size_t n_zero = p - n_signal;
  double cov_sum = 0.0, len_sum = 0.0;
  std::vector<double> percoef(n_zero, 0.0);
  for (std::size_t r = 0; r < replicates; ++r) {
    for (std::size_t j = n_signal; j < p; ++j) {
      cov_sum += cover[r][j];
      len_sum += length[r][j];
      percoef[j - n_signal] += length[r][j];
    }
  }
  const double cells = nrep * static_cast<double>(n_zero);
  out.zero_coverage = cov_sum / cells;
  out.zero_length_pooled = len_sum / cells;
  double percoef_mean = 0.0;
  for (double v : percoef) percoef_mean += v / nrep;
  out.zero_length_percoef = percoef_mean / static_cast<double>(n_zero);
  return out;
}

// ---------------------------------------------------------------------------
// multi-split prediction

struct MultisplitRow {
  std::size_t split = 0;
  std::size_t model_size = 0;
  double mad_value = 0.0;
};

struct MultisplitSummary {
  std::vector<MultisplitRow> rows;
  double size_mean = 0.0, size_sd = 0.0;
  double mad_mean = 0.0, mad_sd = 0.0;
};

// Each split trains on `train_count` randomly chosen rows, predicts the rest
// with the plug-in posterior-median coefficients and scores by MAD.
inline MultisplitSummary run_multisplit(const SamplerSpec& spec,
                                        const Dataset& data,
                                        std::size_t train_count,
                                        std::size_t n_splits, double level,
                                        unsigned threads,
                                        bool standardize_x = false) {
  if (train_count < 2 || train_count >= data.n()) {
    throw config_error("train count must lie in [2, n-1]");
  }
  if (n_splits < 1) throw config_error("need at least one split");

  MultisplitSummary summary;
  summary.rows.resize(n_splits);

  parallel_for(n_splits, threads, [&](std::size_t s) {
    RngStream shuffle_rng(spec.seed, stream_for_shuffle(s));
    std::vector<std::size_t> idx(data.n());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = data.n() - 1; i > 0; --i) {
      const auto pick = static_cast<std::size_t>(
          shuffle_rng.next_uniform() * static_cast<double>(i + 1));
      std::swap(idx[i], idx[pick]);
    }

    Dataset train, test;
    train.X = Matrix(train_count, data.p());
    test.X = Matrix(data.n() - train_count, data.p());
    for (std::size_t i = 0; i < data.n(); ++i) {
      const std::size_t src = idx[i];
      if (i < train_count) {
        train.y.push_back(data.y[src]);
        std::copy(data.X.row(src).begin(), data.X.row(src).end(),
                  train.X.row(i).begin());
      } else {
        test.y.push_back(data.y[src]);
        std::copy(data.X.row(src).begin(), data.X.row(src).end(),
                  test.X.row(i - train_count).begin());
      }
    }

    FitOptions opts;
    opts.level = level;
    opts.standardize_x = standardize_x;
    opts.fit_index = s;
    const FitResult fit = fit_dataset(spec, train, opts);

    std::vector<double> pred(test.n());
    for (std::size_t i = 0; i < test.n(); ++i) {
      double yhat = fit.beta0_median;
      for (std::size_t j = 0; j < data.p(); ++j) {
        yhat += test.X(i, j) * fit.beta_median[j];
      }
      pred[i] = yhat;
    }
    MultisplitRow row;
    row.split = s;
    row.model_size = static_cast<std::size_t>(
        std::count(fit.selected.begin(), fit.selected.end(), true));
    row.mad_value = mad(pred, test.y);
    summary.rows[s] = row;
  });

  const double ns = static_cast<double>(n_splits);
  for (const auto& row : summary.rows) {
    summary.size_mean += static_cast<double>(row.model_size);
    summary.mad_mean += row.mad_value;
  }
  summary.size_mean /= ns;
  summary.mad_mean /= ns;
  double ss_size = 0.0, ss_mad = 0.0;
  for (const auto& row : summary.rows) {
    ss_size += (row.model_size - summary.size_mean) * (row.model_size - summary.size_mean);
    ss_mad += (row.mad_value - summary.mad_mean) * (row.mad_value - summary.mad_mean);
  }
  if (n_splits > 1) {
    summary.size_sd = std::sqrt(ss_size / (ns - 1.0));
    summary.mad_sd = std::sqrt(ss_mad / (ns - 1.0));
  }
  return summary;
}

// ---------------------------------------------------------------------------
// expression-matrix preprocessing

struct PreprocessOptions {
  double max_percentile = 0.25;  // drop features whose max is below this
                                 // percentile of all matrix values
  double min_range = 2.0;        // drop features with range below this
  std::size_t top_k = 300;       // keep the top-k features by CV = sd/mean
};

struct PreprocessResult {
  FeatureMatrix filtered;
  std::size_t input_count = 0;
  std::size_t after_max_filter = 0;
  std::size_t after_range_filter = 0;
  std::size_t after_top_k = 0;
};

inline PreprocessResult preprocess_matrix(const FeatureMatrix& fm,
                                          const PreprocessOptions& opts) {
  if (fm.values.rows == 0 || fm.values.cols == 0) {
    throw config_error("preprocess: empty matrix");
  }
  PreprocessResult out;
  out.input_count = fm.values.rows;

  // percentile of all expression values, full matrix
  std::vector<double> all(fm.values.data);
  std::sort(all.begin(), all.end());
  const double cutoff = quantile_sorted(all, opts.max_percentile);

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < fm.values.rows; ++i) {
    double mx = fm.values(i, 0);
    for (std::size_t j = 1; j < fm.values.cols; ++j) {
      mx = std::max(mx, fm.values(i, j));
    }
    if (mx >= cutoff) keep.push_back(i);
  }
  out.after_max_filter = keep.size();

  std::vector<std::size_t> keep2;
  for (std::size_t i : keep) {
    double mn = fm.values(i, 0), mx = fm.values(i, 0);
    for (std::size_t j = 1; j < fm.values.cols; ++j) {
      mn = std::min(mn, fm.values(i, j));
      mx = std::max(mx, fm.values(i, j));
    }
    if (mx - mn >= opts.min_range) keep2.push_back(i);
  }
  out.after_range_filter = keep2.size();

  // rank the survivors by coefficient of variation
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i : keep2) {
    double mean = 0.0;
    for (std::size_t j = 0; j < fm.values.cols; ++j) mean += fm.values(i, j);
    mean /= static_cast<double>(fm.values.cols);
    double ss = 0.0;
    for (std::size_t j = 0; j < fm.values.cols; ++j) {
      ss += (fm.values(i, j) - mean) * (fm.values(i, j) - mean);
    }
    const double sd = fm.values.cols > 1
                          ? std::sqrt(ss / static_cast<double>(fm.values.cols - 1))
                          : 0.0;
    const double cv = mean != 0.0 ? sd / std::abs(mean) : 0.0;
    ranked.emplace_back(cv, i);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  if (ranked.size() > opts.top_k) ranked.resize(opts.top_k);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  out.after_top_k = ranked.size();

  out.filtered.sample_ids = fm.sample_ids;
  out.filtered.values = Matrix(ranked.size(), fm.values.cols);
  for (std::size_t row = 0; row < ranked.size(); ++row) {
    const std::size_t src = ranked[row].second;
    out.filtered.feature_ids.push_back(fm.feature_ids[src]);
    for (std::size_t j = 0; j < fm.values.cols; ++j) {
      out.filtered.values(row, j) = fm.values(src, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// run manifest

inline void write_manifest(const std::string& path, const std::string& command,
                           const std::map<std::string, std::string>& config,
                           double elapsed_seconds) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write manifest: " + path);
  out << "command=" << command << "\n";
  out << "version=" << kVersion << "\n";
  for (const auto& [key, value] : config) {
    out << key << "=" << value << "\n";
  }
  out << "elapsed_seconds=" << format_double(elapsed_seconds) << "\n";
}

}  // namespace hsreg

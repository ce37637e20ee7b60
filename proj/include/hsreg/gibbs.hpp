#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsreg/distributions.hpp"
#include "hsreg/errors.hpp"
#include "hsreg/model.hpp"
#include "hsreg/rng.hpp"

// Full-conditional update kernels shared by the six samplers, plus the
// systematic-scan chain runner. Every kernel returns its draw together with
// the conditional parameters (mean/variance or shape/scale) so tests can
// check the conditionals against independently built densities.

namespace hsreg {

// Per-observation conditional variance of y_i:
//   RobustLaplace: w_i = tau^{-1} xi^2 v_i
//   Gaussian:      w_i = sigma^2 for all i
// Reciprocals are kept alongside so the per-coefficient kernels avoid a
// division per element.
struct ObservationWeights {
  std::vector<double> w;
  std::vector<double> winv;

  void refresh(const ChainState& st, std::size_t n) {
    w.resize(n);
    winv.resize(n);
    if (st.robust()) {
      const double scale = kXi2 / *st.tau;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = scale * st.v_tilde[i];
        winv[i] = 1.0 / w[i];
      }
    } else {
      const double s = *st.sigma2;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = s;
        winv[i] = 1.0 / s;
      }
    }
    for (double wi : w) {
      if (!(wi > 0.0) || !std::isfinite(wi)) {
        throw numeric_error("observation weight not positive finite");
      }
    }
  }
};

struct NormalDraw {
  double value;
  double mean;
  double variance;
};

struct GammaDraw {
  double value;
  double shape;
  double rate;
};

struct InvGammaDraw {
  double value;
  double shape;
  double scale;
};

namespace detail {

// Four-lane unrolled reductions; the j-loop spends nearly all its time here.
inline double dot2(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double dot3(const double* a, const double* b, const double* c,
                   std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i] * c[i];
    s1 += a[i + 1] * b[i + 1] * c[i + 1];
    s2 += a[i + 2] * b[i + 2] * c[i + 2];
    s3 += a[i + 3] * b[i + 3] * c[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i] * c[i];
  return (s0 + s1) + (s2 + s3);
}

inline double sum(const double* a, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  for (; i < n; ++i) s0 += a[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

// Half-Cauchy tails occasionally overflow the double range under t(2) data;
// s^2, lambda^2, v and b^2 are pinned to this window after each draw.
inline constexpr double kScaleFloor = 1e-12;
inline constexpr double kScaleCeil = 1e12;

inline double clamp_scale(double x) {
  return std::clamp(x, kScaleFloor, kScaleCeil);
}

// beta0 | rest ~ N(mu, S2) with
//   S2^{-1} = sum_i 1/w_i + 1/sigma2_beta0
//   mu      = S2 * sum_i (y_i - x_i' beta)/w_i
inline NormalDraw update_beta0(std::span<const double> resid_excl_intercept,
                               const ObservationWeights& w, double sigma2_beta0,
                               RngStream& rng) {
  const std::size_t n = resid_excl_intercept.size();
  const double prec =
      detail::sum(w.winv.data(), n) + 1.0 / sigma2_beta0;
  const double num = detail::dot2(resid_excl_intercept.data(), w.winv.data(), n);
  if (!std::isfinite(prec) || !(prec > 0.0)) {
    throw numeric_error("update_beta0: conditional precision not positive finite");
  }
  const double variance = 1.0 / prec;
  const double mean = variance * num;
  return {sample_normal(mean, std::sqrt(variance), rng), mean, variance};
}

// beta_j | rest ~ N(mu, s2) with
//   s2^{-1} = sum_i x_ij^2 / w_i + q_j
//   mu      = s2 * sum_i x_ij (y_i - beta0 - sum_{k != j} x_ik beta_k)/w_i
// where q_j is the method's prior precision for beta_j. partial_resid must
// exclude beta_j's own contribution.
inline NormalDraw update_beta_j(std::span<const double> partial_resid,
                                std::span<const double> x_col,
                                const ObservationWeights& w,
                                double prior_precision, RngStream& rng) {
  const std::size_t n = partial_resid.size();
  if (!std::isfinite(prior_precision) || !(prior_precision > 0.0)) {
    throw numeric_error("update_beta_j: prior precision not positive finite");
  }
  const double data_prec = detail::dot3(x_col.data(), x_col.data(), w.winv.data(), n);
  const double num = detail::dot3(x_col.data(), partial_resid.data(), w.winv.data(), n);
  const double prec = data_prec + prior_precision;
  if (!std::isfinite(prec)) {
    throw numeric_error("update_beta_j: conditional precision not finite");
  }
  const double variance = 1.0 / prec;
  const double mean = variance * num;
  return {sample_normal(mean, std::sqrt(variance), rng), mean, variance};
}

// Prior precision q_j of beta_j for the current method.
inline double prior_precision_beta_j(const ChainState& st, std::size_t j) {
  double q = 1.0 / (st.lambda2 * st.s2[j]);
  if (!st.robust()) q /= *st.sigma2;
  if (st.regularized()) q += 1.0 / *st.b2;
  return q;
}

// v_i | rest has the GIG(1/2) kernel
//   v^{-1/2} exp{ -(tau r_i^2/(2 xi^2 v) + tau v) },
// which is the law of the reciprocal of an
// InverseGaussian(sqrt(2 xi^2 / r_i^2), 2 tau) variate, so we draw that
// variate and invert it. r_i^2 is floored to avoid an infinite mean at
// exact interpolation.
inline void update_v_tilde(std::span<const double> resid, double tau,
                           double xi2, RngStream& rng,
                           std::span<double> v_out) {
  if (resid.size() != v_out.size()) {
    throw shape_error("update_v_tilde: residual/output size mismatch");
  }
  for (std::size_t i = 0; i < resid.size(); ++i) {
    const double r2 = std::max(resid[i] * resid[i], 1e-12);
    const double mean = std::sqrt(2.0 * xi2 / r2);
    const double w = sample_inverse_gaussian(mean, 2.0 * tau, rng);
    v_out[i] = clamp_scale(1.0 / w);
  }
}

// tau | rest ~ Gamma(e + 3n/2, f + sum v_i + sum r_i^2/(2 xi^2 v_i))
inline GammaDraw update_tau(std::span<const double> resid,
                            std::span<const double> v_tilde, double xi2,
                            double e, double f, RngStream& rng) {
  const std::size_t n = resid.size();
  if (v_tilde.size() != n) throw shape_error("update_tau: size mismatch");
  double rate = f;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(v_tilde[i] > 0.0)) throw numeric_error("update_tau: non-positive v");
    rate += v_tilde[i] + resid[i] * resid[i] / (2.0 * xi2 * v_tilde[i]);
  }
  const double shape = e + 1.5 * static_cast<double>(n);
  return {sample_gamma(shape, rate, rng), shape, rate};
}

// sigma^2 | rest ~ InvGamma(e + (n+p)/2,
//                           f + r'r/2 + sum_j beta_j^2/(2 lambda^2 s_j^2))
inline InvGammaDraw update_sigma2(Likelihood likelihood,
                                  std::span<const double> resid,
                                  std::span<const double> beta, double lambda2,
                                  std::span<const double> s2, double e,
                                  double f, RngStream& rng) {
  if (likelihood != Likelihood::Gaussian) {
    throw config_error("update_sigma2: only valid under the Gaussian likelihood");
  }
  if (beta.size() != s2.size()) throw shape_error("update_sigma2: size mismatch");
  double scale = f;
  for (double r : resid) scale += 0.5 * r * r;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    scale += 0.5 * beta[j] * beta[j] / (lambda2 * s2[j]);
  }
  const double shape =
      e + 0.5 * static_cast<double>(resid.size() + beta.size());
  return {sample_inverse_gamma(shape, scale, rng), shape, scale};
}

// s_j^2 | rest ~ InvGamma(1, beta_j^2/(2 lambda^2) + 1/nu_j), with the
// beta_j^2 term additionally divided by sigma^2 under the Gaussian likelihood.
inline InvGammaDraw update_s2_j(double beta_j, double lambda2, double nu_j,
                                Likelihood likelihood,
                                std::optional<double> sigma2, RngStream& rng) {
  double quad = beta_j * beta_j / (2.0 * lambda2);
  if (likelihood == Likelihood::Gaussian) {
    if (!sigma2) throw config_error("update_s2_j: sigma2 required under Gaussian");
    quad /= *sigma2;
  }
  const double scale = quad + 1.0 / nu_j;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw numeric_error("update_s2_j: conditional scale not positive finite");
  }
  return {sample_inverse_gamma(1.0, scale, rng), 1.0, scale};
}

// nu_j | rest ~ InvGamma(1, 1/s_j^2 + prior_scale_recip); the last term is 1
// for the horseshoe and 1/phi_j^2 for the horseshoe+.
inline InvGammaDraw update_nu_j(double s2_j, double prior_scale_recip,
                                RngStream& rng) {
  if (!(s2_j > 0.0) || !(prior_scale_recip > 0.0)) {
    throw numeric_error("update_nu_j: inputs must be positive");
  }
  const double scale = 1.0 / s2_j + prior_scale_recip;
  return {sample_inverse_gamma(1.0, scale, rng), 1.0, scale};
}

// phi_j^2 | rest ~ InvGamma(1, 1/nu_j + 1/zeta_j)   (horseshoe+ only)
inline InvGammaDraw update_phi2_j(Prior prior, double nu_j, double zeta_j,
                                  RngStream& rng) {
  if (prior != Prior::HorseshoePlus) {
    throw config_error("update_phi2_j: only valid under the horseshoe+ prior");
  }
  const double scale = 1.0 / nu_j + 1.0 / zeta_j;
  return {sample_inverse_gamma(1.0, scale, rng), 1.0, scale};
}

// zeta_j | rest ~ InvGamma(1, 1/phi_j^2 + 1)   (horseshoe+ only)
inline InvGammaDraw update_zeta_j(Prior prior, double phi2_j, RngStream& rng) {
  if (prior != Prior::HorseshoePlus) {
    throw config_error("update_zeta_j: only valid under the horseshoe+ prior");
  }
  const double scale = 1.0 / phi2_j + 1.0;
  return {sample_inverse_gamma(1.0, scale, rng), 1.0, scale};
}

// lambda^2 | rest ~ InvGamma((p+1)/2, 1/xi1 + sum_j beta_j^2/(2 s_j^2)),
// with the sum additionally divided by sigma^2 under the Gaussian likelihood.
inline InvGammaDraw update_lambda2(std::span<const double> beta,
                                   std::span<const double> s2, double xi1,
                                   Likelihood likelihood,
                                   std::optional<double> sigma2,
                                   RngStream& rng) {
  if (beta.size() != s2.size()) throw shape_error("update_lambda2: size mismatch");
  double quad = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    quad += 0.5 * beta[j] * beta[j] / s2[j];
  }
  if (likelihood == Likelihood::Gaussian) {
    if (!sigma2) throw config_error("update_lambda2: sigma2 required under Gaussian");
    quad /= *sigma2;
  }
  const double shape = 0.5 * (static_cast<double>(beta.size()) + 1.0);
  const double scale = 1.0 / xi1 + quad;
  return {sample_inverse_gamma(shape, scale, rng), shape, scale};
}

// xi1 | rest ~ InvGamma(1, 1 + 1/lambda^2)
inline InvGammaDraw update_xi1(double lambda2, RngStream& rng) {
  const double scale = 1.0 + 1.0 / lambda2;
  return {sample_inverse_gamma(1.0, scale, rng), 1.0, scale};
}

// b^2 | rest ~ InvGamma((c+p)/2, (d + sum_j beta_j^2)/2)  (regularized only)
inline InvGammaDraw update_b2(Prior prior, std::span<const double> beta,
                              double c, double d, RngStream& rng) {
  if (prior != Prior::RegularizedHorseshoe) {
    throw config_error("update_b2: only valid under the regularized horseshoe");
  }
  double ss = 0.0;
  for (double b : beta) ss += b * b;
  const double shape = 0.5 * (c + static_cast<double>(beta.size()));
  const double scale = 0.5 * (d + ss);
  return {sample_inverse_gamma(shape, scale, rng), shape, scale};
}

// Scratch buffers reused across sweeps. x_cols holds a column-major copy of
// the design so the j-loop reads contiguous memory; resid is the running
// residual y - beta0 - X beta maintained incrementally within a sweep.
struct SweepWorkspace {
  std::vector<double> x_cols;  // p blocks of n
  std::vector<double> resid;
  std::vector<double> partial;
  ObservationWeights weights;
  std::size_t n = 0, p = 0;

  void bind(const Dataset& data) {
    if (n == data.n() && p == data.p() && !x_cols.empty()) return;
    n = data.n();
    p = data.p();
    x_cols.resize(n * p);
    for (std::size_t j = 0; j < p; ++j) {
      double* col = x_cols.data() + j * n;
      for (std::size_t i = 0; i < n; ++i) col[i] = data.X(i, j);
    }
    resid.resize(n);
    partial.resize(n);
  }

  std::span<const double> col(std::size_t j) const {
    return {x_cols.data() + j * n, n};
  }
};

// resid = y - beta0 - X beta, recomputed from scratch.
inline void recompute_residual(const Dataset& data, const ChainState& st,
                               SweepWorkspace& ws) {
  ws.bind(data);
  for (std::size_t i = 0; i < ws.n; ++i) ws.resid[i] = data.y[i] - st.beta0;
  for (std::size_t j = 0; j < ws.p; ++j) {
    const double bj = st.beta[j];
    if (bj == 0.0) continue;
    const double* col = ws.x_cols.data() + j * ws.n;
    for (std::size_t i = 0; i < ws.n; ++i) ws.resid[i] -= bj * col[i];
  }
}

// One systematic scan in the fixed order: beta0; beta_1..beta_p with an
// incrementally updated residual; likelihood block (v, tau) or (sigma^2);
// then s^2, nu, (phi^2, zeta), lambda^2, xi1, (b^2). The residual is rebuilt
// from scratch at the top of each sweep to cap floating-point drift.
inline void gibbs_sweep(const SamplerSpec& spec, const Dataset& data,
                        ChainState& st, RngStream& rng, SweepWorkspace& ws) {
  ws.bind(data);
  const std::size_t n = ws.n, p = ws.p;

  ws.weights.refresh(st, n);
  recompute_residual(data, st, ws);

  // intercept
  for (std::size_t i = 0; i < n; ++i) ws.partial[i] = ws.resid[i] + st.beta0;
  const NormalDraw b0 = update_beta0(ws.partial, ws.weights,
                                     spec.hyper.sigma2_beta0, rng);
  st.beta0 = b0.value;
  for (std::size_t i = 0; i < n; ++i) ws.resid[i] = ws.partial[i] - st.beta0;

  // coefficients, coordinate at a time with fresh values
  for (std::size_t j = 0; j < p; ++j) {
    const double* col = ws.x_cols.data() + j * n;
    const double old = st.beta[j];
    for (std::size_t i = 0; i < n; ++i) {
      ws.partial[i] = ws.resid[i] + old * col[i];
    }
    const NormalDraw bj = update_beta_j(ws.partial, ws.col(j), ws.weights,
                                        prior_precision_beta_j(st, j), rng);
    st.beta[j] = bj.value;
    for (std::size_t i = 0; i < n; ++i) {
      ws.resid[i] = ws.partial[i] - st.beta[j] * col[i];
    }
  }

  // likelihood block
  if (spec.robust()) {
    update_v_tilde(ws.resid, *st.tau, kXi2, rng, st.v_tilde);
    st.tau = update_tau(ws.resid, st.v_tilde, kXi2, spec.hyper.e, spec.hyper.f,
                        rng).value;
  } else {
    st.sigma2 = update_sigma2(spec.likelihood, ws.resid, st.beta, st.lambda2,
                              st.s2, spec.hyper.e, spec.hyper.f, rng).value;
  }

  // local scales and their auxiliaries
  for (std::size_t j = 0; j < p; ++j) {
    st.s2[j] = clamp_scale(update_s2_j(st.beta[j], st.lambda2, st.nu[j],
                                       spec.likelihood, st.sigma2, rng).value);
    const double recip = spec.plus() ? 1.0 / st.phi2[j] : 1.0;
    st.nu[j] = update_nu_j(st.s2[j], recip, rng).value;
    if (spec.plus()) {
      st.phi2[j] = update_phi2_j(spec.prior, st.nu[j], st.zeta[j], rng).value;
      st.zeta[j] = update_zeta_j(spec.prior, st.phi2[j], rng).value;
    }
  }

  // global scale block
  st.lambda2 = clamp_scale(update_lambda2(st.beta, st.s2, st.xi1,
                                          spec.likelihood, st.sigma2, rng).value);
  st.xi1 = update_xi1(st.lambda2, rng).value;
  if (spec.regularized()) {
    st.b2 = clamp_scale(update_b2(spec.prior, st.beta, spec.hyper.c,
                                  spec.hyper.d, rng).value);
  }
}

// Run one chain and retain every thin-th post-burn-in state. stream_id
// selects the RNG stream; allocate it with stream_for_chain so chains never
// share a stream with data generation.
inline PosteriorDraws run_chain(const SamplerSpec& spec, const Dataset& data,
                                std::uint64_t stream_id = stream_for_chain(0)) {
  spec.validate();
  data.validate();
  ChainState st = init_state(spec, data);
  RngStream rng(spec.seed, stream_id);
  SweepWorkspace ws;

  const std::size_t m = (spec.n_iter - spec.burn_in) / spec.thin;
  PosteriorDraws draws;
  draws.beta0.reserve(m);
  draws.beta = Matrix(m, data.p());
  draws.scale_trace.reserve(m);
  draws.lambda2_trace.reserve(m);

  std::size_t kept = 0;
  for (std::size_t t = 1; t <= spec.n_iter; ++t) {
    try {
      gibbs_sweep(spec, data, st, rng, ws);
    } catch (const numeric_error& e) {
      throw numeric_error("sweep " + std::to_string(t) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw numeric_error("sweep " + std::to_string(t) + ": " + e.what());
    }
    if (t > spec.burn_in && (t - spec.burn_in) % spec.thin == 0 && kept < m) {
      draws.beta0.push_back(st.beta0);
      std::copy(st.beta.begin(), st.beta.end(), draws.beta.row(kept).begin());
      draws.scale_trace.push_back(st.robust() ? *st.tau : *st.sigma2);
      draws.lambda2_trace.push_back(st.lambda2);
      ++kept;
    }
  }
  return draws;
}

}  // namespace hsreg

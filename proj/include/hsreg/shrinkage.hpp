#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "hsreg/errors.hpp"

// Shrinkage-factor analytics: the decomposition of the conditional posterior
// mean of beta_j as (1 - kappa_j) * beta_hat_j, and the conditional kappa
// densities under the horseshoe and horseshoe+ priors. All functions here
// are pure and thread-safe.

namespace hsreg {

// a_j = sum_i x_ij^2 / (tau^{-1} xi^2 v_i)
inline double compute_a_j(std::span<const double> x_col, double tau,
                          std::span<const double> v_tilde, double xi2) {
  if (x_col.size() != v_tilde.size()) {
    throw shape_error("compute_a_j: size mismatch");
  }
  double a = 0.0;
  for (std::size_t i = 0; i < x_col.size(); ++i) {
    a += x_col[i] * x_col[i] * tau / (xi2 * v_tilde[i]);
  }
  return a;
}

// Weighted least-squares coordinate estimate
//   beta_hat_j = a_j^{-1} sum_i x_ij (partial residual)_i / (tau^{-1} xi^2 v_i)
inline double beta_hat_j(std::span<const double> x_col,
                         std::span<const double> partial_resid, double tau,
                         std::span<const double> v_tilde, double xi2,
                         double a_j) {
  if (x_col.size() != partial_resid.size() || x_col.size() != v_tilde.size()) {
    throw shape_error("beta_hat_j: size mismatch");
  }
  double num = 0.0;
  for (std::size_t i = 0; i < x_col.size(); ++i) {
    num += x_col[i] * partial_resid[i] * tau / (xi2 * v_tilde[i]);
  }
  return num / a_j;
}

// kappa_j = (1 + lambda^2 s_j^2 a_j)^{-1}; the conditional posterior mean of
// beta_j equals (1 - kappa_j) * beta_hat_j.
inline double kappa(double lambda2, double s2_j, double a_j) {
  return 1.0 / (1.0 + lambda2 * s2_j * a_j);
}

struct ShrinkageContext {
  double a_j;
  double k_j;  // lambda * sqrt(a_j)
  double lambda2;
  double s2_j;
};

inline ShrinkageContext make_shrinkage_context(std::span<const double> x_col,
                                               double tau,
                                               std::span<const double> v_tilde,
                                               double xi2, double lambda2,
                                               double s2_j) {
  const double a = compute_a_j(x_col, tau, v_tilde, xi2);
  return {a, std::sqrt(lambda2 * a), lambda2, s2_j};
}

// Effective squared local scale of the regularized horseshoe:
//   s~_j^2 = b^2 s_j^2 / (b^2 + lambda^2 s_j^2)
inline double regularized_s2(double b2, double lambda2, double s2_j) {
  return b2 * s2_j / (b2 + lambda2 * s2_j);
}

namespace detail {

inline void require_open_unit(double kappa_val) {
  if (!(kappa_val > 0.0) || !(kappa_val < 1.0)) {
    throw std::domain_error("kappa must lie in the open interval (0, 1)");
  }
}

}  // namespace detail

// Conditional density of kappa_j under the horseshoe prior:
//   p(k) = (1/pi) * k_j / ((k_j^2 - 1) k + 1) / sqrt(k (1 - k))
inline double kappa_density_hs(double kappa_val, double k_j) {
  detail::require_open_unit(kappa_val);
  return k_j / (std::numbers::pi * ((k_j * k_j - 1.0) * kappa_val + 1.0) *
                std::sqrt(kappa_val * (1.0 - kappa_val)));
}

namespace detail {

inline double kappa_density_hsplus_raw(double kappa_val, double k_j) {
  const double lognum =
      0.5 * std::log((1.0 - kappa_val) / (kappa_val * k_j * k_j));
  const double denom = 1.0 - kappa_val * (1.0 + k_j * k_j);
  return (2.0 / (std::numbers::pi * std::numbers::pi)) * (lognum / denom) *
         k_j / std::sqrt(kappa_val * (1.0 - kappa_val));
}

}  // namespace detail

// Conditional density of kappa_j under the horseshoe+ prior:
//   p(k) = (2/pi^2) * log(sqrt((1-k)/(k k_j^2))) / (1 - k (1 + k_j^2))
//          * k_j / sqrt(k (1 - k))
// The point k = 1/(1 + k_j^2) is a removable 0/0 singularity; near it the
// value is taken as a two-sided finite-difference limit.
inline double kappa_density_hsplus(double kappa_val, double k_j) {
  detail::require_open_unit(kappa_val);
  const double denom = 1.0 - kappa_val * (1.0 + k_j * k_j);
  if (std::abs(denom) < 1e-8) {
    const double h =
        std::min({1e-6, 0.5 * kappa_val, 0.5 * (1.0 - kappa_val)});
    return 0.5 * (detail::kappa_density_hsplus_raw(kappa_val - h, k_j) +
                  detail::kappa_density_hsplus_raw(kappa_val + h, k_j));
  }
  return detail::kappa_density_hsplus_raw(kappa_val, k_j);
}

enum class SelectionDirection {
  ShrinkageWeight,  // select when 1 - kappa_j > cutoff (default)
  KappaLiteral,     // select when kappa_j > cutoff
};

// Threshold the per-coefficient shrinkage factors. Ties at the cutoff are
// excluded (strict inequality).
inline std::vector<bool> select_by_shrinkage_weight(
    std::span<const double> kappas, double cutoff,
    SelectionDirection direction = SelectionDirection::ShrinkageWeight) {
  if (!(cutoff > 0.0) || !(cutoff < 1.0)) {
    throw config_error("selection cutoff must lie in (0, 1)");
  }
  std::vector<bool> selected(kappas.size());
  for (std::size_t j = 0; j < kappas.size(); ++j) {
    const double weight = direction == SelectionDirection::ShrinkageWeight
                              ? 1.0 - kappas[j]
                              : kappas[j];
    selected[j] = weight > cutoff;
  }
  return selected;
}

}  // namespace hsreg

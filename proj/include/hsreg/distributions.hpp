#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "hsreg/errors.hpp"
#include "hsreg/matrix.hpp"
#include "hsreg/rng.hpp"

// Random-variate kernels with pinned parameterizations:
//   Gamma(shape, rate)            density ~ x^{a-1} exp(-b x)
//   Inverse-Gamma(shape, scale)   density ~ x^{-a-1} exp(-b / x)
//   Exponential(rate)             density ~ r exp(-r x)
//   Inverse-Gaussian(mean, shape) E X = mean, Var X = mean^3 / shape
// Hand-rolled so one build reproduces draw sequences bit-for-bit from a
// (seed, stream_id) pair, independent of the standard library in use.

namespace hsreg {

namespace detail {

inline void require_positive_finite(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

// Uniform on (0, 1]; avoids log(0) in inversion samplers.
inline double uniform_pos(RngStream& rng) { return 1.0 - rng.next_uniform(); }

}  // namespace detail

inline double sample_normal(double mean, double sd, RngStream& rng) {
  detail::require_positive_finite(sd, "normal sd");
  if (!std::isfinite(mean)) throw std::invalid_argument("normal mean must be finite");
  // Box-Muller, cosine branch only: two uniforms per variate, no cached state.
  const double u1 = detail::uniform_pos(rng);
  const double u2 = rng.next_uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * std::numbers::pi * u2);
  return mean + sd * z;
}

inline double sample_exponential(double rate, RngStream& rng) {
  detail::require_positive_finite(rate, "exponential rate");
  // -log(1 - U) with U in [0, 1); never hits log(0)
  return -std::log1p(-rng.next_uniform()) / rate;
}

inline double sample_gamma(double shape, double rate, RngStream& rng) {
  detail::require_positive_finite(shape, "gamma shape");
  detail::require_positive_finite(rate, "gamma rate");
  // Marsaglia-Tsang squeeze; shapes below one are boosted by U^{1/shape}.
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::pow(detail::uniform_pos(rng), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(0.0, 1.0, rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = detail::uniform_pos(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return boost * d * v / rate;
    }
  }
}

inline double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  detail::require_positive_finite(shape, "inverse-gamma shape");
  detail::require_positive_finite(scale, "inverse-gamma scale");
  return 1.0 / sample_gamma(shape, scale, rng);
}

// Michael-Schucany-Haas transform-with-rejection. The root
// mean*y - sqrt(mean^2 y^2 + 4 mean shape y) is evaluated in a rearranged
// form that avoids cancellation when mean*y dominates.
inline double sample_inverse_gaussian(double mean, double shape, RngStream& rng) {
  detail::require_positive_finite(mean, "inverse-gaussian mean");
  detail::require_positive_finite(shape, "inverse-gaussian shape");
  const double z = sample_normal(0.0, 1.0, rng);
  const double my = mean * z * z;
  const double disc = std::sqrt(my * (my + 4.0 * shape));
  const double x = my + disc > 0.0 ? mean - 2.0 * mean * my / (my + disc) : mean;
  const double u = rng.next_uniform();
  if (u <= mean / (mean + x)) return x;
  return mean * mean / x;
}

// Error laws used by the simulation designs.
enum class ErrorKind {
  StdNormal = 1,       // N(0, 1)
  StudentT2 = 2,       // t with 2 degrees of freedom
  Laplace = 3,         // Laplace(0, 1)
  MixtureNormal = 4,   // 0.8 N(0,1) + 0.2 N(0,3)
  Lognormal = 5,       // Lognormal(0, 1)
};

// How the "3" in the N(0,3) contamination component is read.
enum class MixtureScale { Variance, StdDev };

inline ErrorKind error_kind_from_int(int kind) {
  if (kind < 1 || kind > 5) {
    throw std::invalid_argument("error kind must be in 1..5");
  }
  return static_cast<ErrorKind>(kind);
}

inline double sample_error(ErrorKind kind, RngStream& rng,
                           MixtureScale mixture_scale = MixtureScale::Variance) {
  switch (kind) {
    case ErrorKind::StdNormal:
      return sample_normal(0.0, 1.0, rng);
    case ErrorKind::StudentT2: {
      // t(2) = Z / sqrt(W/2), W ~ chi^2_2 = Exp(rate 1/2)
      const double z = sample_normal(0.0, 1.0, rng);
      const double w = sample_exponential(0.5, rng);
      return z / std::sqrt(w / 2.0);
    }
    case ErrorKind::Laplace: {
      const double e = sample_exponential(1.0, rng);
      return rng.next_uniform() < 0.5 ? -e : e;
    }
    case ErrorKind::MixtureNormal: {
      const double sd3 =
          mixture_scale == MixtureScale::Variance ? std::sqrt(3.0) : 3.0;
      return rng.next_uniform() < 0.8 ? sample_normal(0.0, 1.0, rng)
                                      : sample_normal(0.0, sd3, rng);
    }
    case ErrorKind::Lognormal:
      return std::exp(sample_normal(0.0, 1.0, rng));
  }
  throw std::invalid_argument("unknown error kind");
}

// Lower Cholesky factor of a symmetric positive-definite matrix.
inline Matrix cholesky_lower(const Matrix& cov) {
  if (cov.rows != cov.cols) throw numeric_error("cholesky: matrix is not square");
  const std::size_t p = cov.rows;
  Matrix chol(p, p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double diag = cov(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= chol(j, k) * chol(j, k);
    if (!(diag > 0.0)) {
      throw numeric_error("cholesky: matrix not positive definite at pivot " +
                          std::to_string(j));
    }
    chol(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = cov(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= chol(i, k) * chol(j, k);
      chol(i, j) = s / chol(j, j);
    }
  }
  return chol;
}

// One draw from N(0, L L^T): out = L z with z iid standard normal.
inline void sample_mvn_row(const Matrix& chol, RngStream& rng,
                           std::span<double> out) {
  if (chol.rows != chol.cols || out.size() != chol.rows) {
    throw shape_error("sample_mvn_row: factor/output size mismatch");
  }
  const std::size_t p = chol.rows;
  std::vector<double> z(p);
  for (std::size_t i = 0; i < p; ++i) z[i] = sample_normal(0.0, 1.0, rng);
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += chol(i, k) * z[k];
    out[i] = s;
  }
}

}  // namespace hsreg

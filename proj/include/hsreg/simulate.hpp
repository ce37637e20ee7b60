#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hsreg/distributions.hpp"
#include "hsreg/errors.hpp"
#include "hsreg/model.hpp"
#include "hsreg/rng.hpp"

// Synthetic-data generators. Covariate rows are multivariate normal under an
// AR(1) (rho^|i-j|) or banded (rho iff |i-j| = 1) correlation structure;
// errors come from one of five laws; the coefficient vector follows either
// the selection scheme (evenly spaced Uniform(0.4, 0.9) signals, intercept 1)
// or the inference scheme (1, 1.5, 2, 0, ..., intercept 0).

namespace hsreg {

enum class CorrKind { AR1, Banded };
enum class CoeffScheme { Selection15, Inference3 };

struct SimDesign {
  std::size_t n = 100;
  std::size_t p = 200;
  CorrKind corr = CorrKind::AR1;
  double rho = 0.5;
  int error_kind = 1;  // 1..5
  bool heteroscedastic = false;
  CoeffScheme scheme = CoeffScheme::Selection15;
  std::size_t num_nonzero = 15;      // selection scheme signal count
  bool random_positions = false;     // redraw signal positions per replicate
  std::optional<double> intercept;   // defaults: selection 1, inference 0
  MixtureScale mixture_scale = MixtureScale::Variance;
  std::uint64_t replicate_id = 0;

  double intercept_value() const {
    if (intercept) return *intercept;
    return scheme == CoeffScheme::Selection15 ? 1.0 : 0.0;
  }

  void validate() const {
    if (p < 1 || n < 2) throw config_error("design: need n >= 2, p >= 1");
    (void)error_kind_from_int(error_kind);
    if (scheme == CoeffScheme::Selection15 && p < num_nonzero) {
      throw config_error("design: p must be >= the number of nonzero signals");
    }
    if (scheme == CoeffScheme::Selection15 && num_nonzero < 1) {
      throw config_error("design: selection scheme needs at least one signal");
    }
    if (scheme == CoeffScheme::Inference3 && p < 3) {
      throw config_error("design: inference scheme needs p >= 3");
    }
    if (heteroscedastic && p < 2) {
      throw config_error("design: heteroscedastic errors need p >= 2");
    }
    if (!(std::abs(rho) < 1.0)) throw config_error("design: |rho| must be < 1");
  }
};

inline Matrix build_correlation(CorrKind corr, std::size_t p, double rho) {
  Matrix sigma(p, p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto lag = i > j ? i - j : j - i;
      if (corr == CorrKind::AR1) {
        sigma(i, j) = std::pow(rho, static_cast<double>(lag));
      } else {
        sigma(i, j) = lag == 0 ? 1.0 : (lag == 1 ? rho : 0.0);
      }
    }
  }
  return sigma;
}

struct TrueCoefficients {
  double beta0 = 0.0;
  std::vector<double> beta;
  std::vector<bool> nonzero;
};

inline TrueCoefficients gen_coefficients(const SimDesign& design,
                                         RngStream& rng) {
  design.validate();
  TrueCoefficients truth;
  truth.beta.assign(design.p, 0.0);
  truth.nonzero.assign(design.p, false);
  truth.beta0 = design.intercept_value();

  if (design.scheme == CoeffScheme::Inference3) {
    truth.beta[0] = 1.0;
    truth.beta[1] = 1.5;
    truth.beta[2] = 2.0;
    truth.nonzero[0] = truth.nonzero[1] = truth.nonzero[2] = true;
    return truth;
  }

  std::vector<std::size_t> positions;
  positions.reserve(design.num_nonzero);
  if (design.random_positions) {
    // Fisher-Yates over indices, first num_nonzero kept
    std::vector<std::size_t> idx(design.p);
    for (std::size_t j = 0; j < design.p; ++j) idx[j] = j;
    for (std::size_t j = 0; j < design.num_nonzero; ++j) {
      const auto pick =
          j + static_cast<std::size_t>(rng.next_uniform() *
                                       static_cast<double>(design.p - j));
      std::swap(idx[j], idx[pick]);
      positions.push_back(idx[j]);
    }
  } else {
    const std::size_t stride = design.p / design.num_nonzero;
    for (std::size_t k = 0; k < design.num_nonzero; ++k) {
      positions.push_back(k * std::max<std::size_t>(stride, 1));
    }
  }
  for (std::size_t pos : positions) {
    truth.beta[pos] = 0.4 + 0.5 * rng.next_uniform();  // Uniform(0.4, 0.9)
    truth.nonzero[pos] = true;
  }
  return truth;
}

struct SimulatedData {
  Dataset data;
  TrueCoefficients truth;
};

// Deterministic per (design, master_seed, replicate_id): the replicate id
// selects the RNG stream, so replicates are independent yet individually
// reproducible. Draw order: coefficients, covariate rows, errors.
inline SimulatedData gen_dataset(const SimDesign& design,
                                 std::uint64_t master_seed) {
  design.validate();
  RngStream rng(master_seed, stream_for_data(design.replicate_id));
  SimulatedData out;
  out.truth = gen_coefficients(design, rng);

  const Matrix chol =
      cholesky_lower(build_correlation(design.corr, design.p, design.rho));
  out.data.X = Matrix(design.n, design.p);
  for (std::size_t i = 0; i < design.n; ++i) {
    sample_mvn_row(chol, rng, out.data.X.row(i));
  }

  const ErrorKind kind = error_kind_from_int(design.error_kind);
  out.data.y.resize(design.n);
  for (std::size_t i = 0; i < design.n; ++i) {
    double mean = out.truth.beta0;
    const auto row = out.data.X.row(i);
    for (std::size_t j = 0; j < design.p; ++j) {
      mean += row[j] * out.truth.beta[j];
    }
    double eps = sample_error(kind, rng, design.mixture_scale);
    if (design.heteroscedastic) {
      eps *= 1.0 + out.data.X(i, 1);  // (1 + x_{i2}) scaling
    }
    out.data.y[i] = mean + eps;
  }
  out.data.validate();
  return out;
}

}  // namespace hsreg

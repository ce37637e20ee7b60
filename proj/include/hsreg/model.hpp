#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsreg/errors.hpp"
#include "hsreg/matrix.hpp"

namespace hsreg {

enum class Likelihood { RobustLaplace, Gaussian };
enum class Prior { Horseshoe, HorseshoePlus, RegularizedHorseshoe };

// Fixed mixture constant: the Laplace error admits the representation
// eps = tau^{-1} xi sqrt(v) z with xi = sqrt(8).
inline constexpr double kXi2 = 8.0;

// Prior hyperparameters. Defaults are weakly informative; the paper never
// pins values, so every field is overridable from configuration.
struct Hyper {
  double sigma2_beta0 = 100.0;  // intercept prior variance
  double e = 1.0;               // Gamma/Inverse-Gamma shape for tau or sigma^2
  double f = 1.0;               // ... and rate-or-scale
  double c = 1.0;               // b^2 prior shape numerator (regularized only)
  double d = 1.0;               // b^2 prior scale numerator (regularized only)

  void validate() const {
    auto check = [](double x, const char* name) {
      if (!(x > 0.0) || !std::isfinite(x)) {
        throw config_error(std::string("hyperparameter ") + name +
                           " must be positive and finite");
      }
    };
    check(sigma2_beta0, "sigma2_beta0");
    check(e, "e");
    check(f, "f");
    check(c, "c");
    check(d, "d");
  }
};

// One of the six methods: likelihood x prior plus chain controls.
struct SamplerSpec {
  Likelihood likelihood = Likelihood::RobustLaplace;
  Prior prior = Prior::Horseshoe;
  Hyper hyper{};
  std::size_t n_iter = 10000;
  std::size_t burn_in = 5000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;

  void validate() const {
    hyper.validate();
    if (thin < 1) throw config_error("thin must be >= 1");
    if (burn_in >= n_iter) throw config_error("burn_in must be < n_iter");
    if ((n_iter - burn_in) / thin < 1) {
      throw config_error("no retained draws: (n_iter - burn_in)/thin < 1");
    }
  }

  bool robust() const { return likelihood == Likelihood::RobustLaplace; }
  bool plus() const { return prior == Prior::HorseshoePlus; }
  bool regularized() const { return prior == Prior::RegularizedHorseshoe; }
};

struct Dataset {
  std::vector<double> y;
  Matrix X;  // n x p

  std::size_t n() const { return X.rows; }
  std::size_t p() const { return X.cols; }

  void validate() const {
    if (y.size() != X.rows) throw shape_error("dataset: y length != X row count");
    if (X.cols < 1) throw config_error("dataset: p must be >= 1");
    if (X.rows < 2) throw config_error("dataset: n must be >= 2");
    for (double v : y) {
      if (!std::isfinite(v)) throw config_error("dataset: non-finite response");
    }
    for (double v : X.data) {
      if (!std::isfinite(v)) throw config_error("dataset: non-finite design entry");
    }
  }
};

// Full latent-state assignment for one chain. Fields gated by
// (likelihood, prior) are engaged exactly when their gate holds:
// v_tilde/tau only under the Laplace working likelihood, sigma2 only under
// the Gaussian one, phi2/zeta only for horseshoe+, b2 only for the
// regularized variant.
struct ChainState {
  Likelihood likelihood = Likelihood::RobustLaplace;
  Prior prior = Prior::Horseshoe;

  double beta0 = 0.0;
  std::vector<double> beta;

  std::vector<double> v_tilde;        // robust only, length n
  std::optional<double> tau;          // robust only
  std::optional<double> sigma2;       // Gaussian only

  std::vector<double> s2;             // local scales s_j^2
  std::vector<double> nu;             // auxiliary nu_j
  std::vector<double> phi2;           // horseshoe+ only
  std::vector<double> zeta;           // horseshoe+ only
  double lambda2 = 1.0;               // global scale
  double xi1 = 1.0;                   // auxiliary for lambda^2
  std::optional<double> b2;           // regularized only

  bool robust() const { return likelihood == Likelihood::RobustLaplace; }
  bool plus() const { return prior == Prior::HorseshoePlus; }
  bool regularized() const { return prior == Prior::RegularizedHorseshoe; }
};

// Deterministic neutral initialization: zeros for location parameters,
// ones for every positive-constrained latent.
inline ChainState init_state(const SamplerSpec& spec, const Dataset& data) {
  spec.validate();
  data.validate();
  ChainState st;
  st.likelihood = spec.likelihood;
  st.prior = spec.prior;
  st.beta.assign(data.p(), 0.0);
  st.s2.assign(data.p(), 1.0);
  st.nu.assign(data.p(), 1.0);
  if (spec.robust()) {
    st.v_tilde.assign(data.n(), 1.0);
    st.tau = 1.0;
  } else {
    st.sigma2 = 1.0;
  }
  if (spec.plus()) {
    st.phi2.assign(data.p(), 1.0);
    st.zeta.assign(data.p(), 1.0);
  }
  if (spec.regularized()) st.b2 = 1.0;
  return st;
}

// Retained post-burn-in states: m = (n_iter - burn_in) / thin rows.
struct PosteriorDraws {
  std::vector<double> beta0;
  Matrix beta;                        // m x p
  std::vector<double> scale_trace;    // tau (robust) or sigma^2 (Gaussian)
  std::vector<double> lambda2_trace;

  std::size_t m() const { return beta.rows; }
  std::size_t p() const { return beta.cols; }
};

}  // namespace hsreg

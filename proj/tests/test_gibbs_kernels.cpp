#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hsreg/distributions.hpp"
#include "hsreg/gibbs.hpp"
#include "support/oracles.hpp"

using namespace hsreg;

namespace {

ObservationWeights weights_from(std::vector<double> w) {
  ObservationWeights ow;
  ow.w = std::move(w);
  ow.winv.resize(ow.w.size());
  for (std::size_t i = 0; i < ow.w.size(); ++i) ow.winv[i] = 1.0 / ow.w[i];
  return ow;
}

}  // namespace

TEST_CASE("intercept conditional") {
  RngStream rng(101);
  SECTION("single-observation closed form") {
    const std::vector<double> resid = {2.0};
    const auto d = update_beta0(resid, weights_from({1.0}), 100.0, rng);
    REQUIRE(d.variance == Catch::Approx(1.0 / 1.01).epsilon(1e-12));
    REQUIRE(d.mean == Catch::Approx(2.0 / 1.01).epsilon(1e-12));
  }
  SECTION("zero residuals center the conditional at zero") {
    const std::vector<double> resid(5, 0.0);
    const auto d = update_beta0(resid, weights_from({1, 2, 3, 4, 5}), 10.0, rng);
    REQUIRE(d.mean == 0.0);
  }
  SECTION("conditional matches the grid-normalized joint kernel") {
    // five observations with uneven weights, random residuals
    const std::vector<double> resid = {0.7, -1.2, 2.4, 0.1, -0.5};
    const std::vector<double> w = {0.5, 1.5, 0.8, 2.0, 1.1};
    const double sigma2_beta0 = 100.0;
    const auto d = update_beta0(resid, weights_from(w), sigma2_beta0, rng);
    const double tv = oracle::tv_against_log_density(
        [&](double b0) {
          double lp = -b0 * b0 / (2.0 * sigma2_beta0);
          for (std::size_t i = 0; i < resid.size(); ++i) {
            lp -= (resid[i] - b0) * (resid[i] - b0) / (2.0 * w[i]);
          }
          return lp;
        },
        [&](double b0) { return oracle::normal_pdf(b0, d.mean, d.variance); },
        -10.0, 10.0, 100000);
    REQUIRE(tv < 1e-3);
  }
}

TEST_CASE("coefficient conditional") {
  RngStream rng(102);
  SECTION("all-zero column reduces to the prior") {
    const std::vector<double> resid = {1.0, 2.0, 3.0};
    const std::vector<double> x(3, 0.0);
    const auto d = update_beta_j(resid, x, weights_from({1, 1, 1}), 4.0, rng);
    REQUIRE(d.mean == 0.0);
    REQUIRE(d.variance == Catch::Approx(0.25));
  }
  SECTION("infinite shrinkage pins the draw at zero") {
    const std::vector<double> resid = {1.0, -2.0, 0.5};
    const std::vector<double> x = {0.3, 0.9, -0.4};
    for (int i = 0; i < 50; ++i) {
      const auto d =
          update_beta_j(resid, x, weights_from({1, 1, 1}), 1e12, rng);
      REQUIRE(std::abs(d.value) < 1e-5);
    }
  }
  SECTION("conditional matches the grid-normalized joint kernel") {
    const std::vector<double> resid = {0.8, -0.3, 1.9, -2.2, 0.4};
    const std::vector<double> x = {1.1, -0.7, 0.4, 0.9, -1.3};
    const std::vector<double> w = {0.9, 1.7, 0.6, 1.2, 0.8};
    const double q = 0.7;
    const auto d = update_beta_j(resid, x, weights_from(w), q, rng);
    const double tv = oracle::tv_against_log_density(
        [&](double bj) {
          double lp = -q * bj * bj / 2.0;
          for (std::size_t i = 0; i < resid.size(); ++i) {
            const double r = resid[i] - x[i] * bj;
            lp -= r * r / (2.0 * w[i]);
          }
          return lp;
        },
        [&](double bj) { return oracle::normal_pdf(bj, d.mean, d.variance); },
        -10.0, 10.0, 100000);
    REQUIRE(tv < 1e-3);
  }
  SECTION("bad prior precision is a numeric error") {
    const std::vector<double> resid = {1.0};
    const std::vector<double> x = {1.0};
    REQUIRE_THROWS_AS(
        update_beta_j(resid, x, weights_from({1.0}), std::nan(""), rng),
        numeric_error);
  }
}

TEST_CASE("latent scale conditional (v)") {
  SECTION("strict positivity") {
    RngStream rng(103);
    const std::vector<double> resid = {0.0, 1e-30, -2.5, 4.0};
    std::vector<double> v(4);
    update_v_tilde(resid, 0.7, kXi2, rng, v);
    for (double x : v) REQUIRE(x > 0.0);
  }
  SECTION("draws match the quadrature-normalized target kernel") {
    // fixed r = 1, tau = 1, xi^2 = 8; density ~ v^{-1/2} exp(-(r^2 tau/(2 xi^2 v) + tau v))
    const double r = 1.0, tau = 1.0;
    const auto kernel = [&](double v) {
      return std::pow(v, -0.5) *
             std::exp(-(tau * r * r / (2.0 * kXi2 * v) + tau * v));
    };
    // substitute v = u^2 so the integrand is smooth at the origin
    const oracle::TabulatedCdf cdf_u(
        [&](double u) { return kernel(u * u) * 2.0 * u; }, 1e-9,
        std::sqrt(50.0), 400000);
    RngStream rng(104);
    const std::vector<double> resid = {r};
    std::vector<double> v(1);
    std::vector<double> draws(1000000);
    for (auto& d : draws) {
      update_v_tilde(resid, tau, kXi2, rng, v);
      d = v[0];
    }
    const double ks = oracle::ks_statistic(
        draws, [&](double x) { return cdf_u(std::sqrt(x)); });
    REQUIRE(ks < 0.01);
  }
  SECTION("larger tau shrinks the conditional mean") {
    const std::vector<double> resid = {1.0};
    std::vector<double> v(1);
    double mean_low = 0.0, mean_high = 0.0;
    RngStream rng(105);
    for (int i = 0; i < 200000; ++i) {
      update_v_tilde(resid, 1.0, kXi2, rng, v);
      mean_low += v[0];
      update_v_tilde(resid, 10.0, kXi2, rng, v);
      mean_high += v[0];
    }
    REQUIRE(mean_high < mean_low);
  }
}

TEST_CASE("tau conditional") {
  RngStream rng(106);
  SECTION("shape and rate arithmetic") {
    // r_i = 1, v_i = 0.5 over n = 4: sum v = 2, sum r^2/(2 xi^2 v) = 0.5
    const std::vector<double> resid(4, 1.0);
    const std::vector<double> v(4, 0.5);
    const auto d = update_tau(resid, v, kXi2, 1.0, 1.0, rng);
    REQUIRE(d.shape == Catch::Approx(7.0));
    REQUIRE(d.rate == Catch::Approx(3.5));
  }
  SECTION("monte carlo mean matches shape/rate") {
    const std::vector<double> resid = {0.4, -1.0, 2.0, 0.3, -0.6};
    const std::vector<double> v = {0.9, 1.4, 0.3, 2.2, 0.7};
    double mean = 0.0;
    double shape = 0.0, rate = 0.0;
    const int reps = 1000000;
    for (int i = 0; i < reps; ++i) {
      const auto d = update_tau(resid, v, kXi2, 1.0, 1.0, rng);
      mean += d.value;
      shape = d.shape;
      rate = d.rate;
    }
    mean /= reps;
    REQUIRE(mean == Catch::Approx(shape / rate).epsilon(0.005));
  }
  SECTION("conditional matches the grid-normalized joint kernel") {
    const std::vector<double> resid = {0.4, -1.0, 2.0};
    const std::vector<double> v = {0.9, 1.4, 0.3};
    const auto d = update_tau(resid, v, kXi2, 1.0, 1.0, rng);
    const double shape = d.shape, rate = d.rate;
    const double tv = oracle::tv_against_log_density(
        [&](double tau) {
          // literal product over i of the augmented likelihood terms
          double lp = (1.0 - 1.0) * std::log(tau) - 1.0 * tau;  // Gamma(e=1,f=1)
          for (std::size_t i = 0; i < resid.size(); ++i) {
            lp += 0.5 * std::log(tau) -
                  tau * resid[i] * resid[i] / (2.0 * kXi2 * v[i]);
            lp += std::log(tau) - tau * v[i];
          }
          return lp;
        },
        [&](double tau) {
          return std::exp((shape - 1.0) * std::log(tau) - rate * tau +
                          shape * std::log(rate) - std::lgamma(shape));
        },
        1e-6, 30.0, 100000);
    REQUIRE(tv < 1e-3);
  }
  SECTION("non-positive v rejected") {
    const std::vector<double> resid = {1.0};
    const std::vector<double> v = {0.0};
    REQUIRE_THROWS_AS(update_tau(resid, v, kXi2, 1.0, 1.0, rng), numeric_error);
  }
}

TEST_CASE("sigma2 conditional") {
  RngStream rng(107);
  SECTION("shape arithmetic") {
    const std::vector<double> resid(4, 0.0);
    const std::vector<double> beta(2, 0.0);
    const std::vector<double> s2(2, 1.0);
    const auto d = update_sigma2(Likelihood::Gaussian, resid, beta, 1.0, s2,
                                 1.0, 2.0, rng);
    REQUIRE(d.shape == Catch::Approx(4.0));
    REQUIRE(d.scale == Catch::Approx(2.0));
  }
  SECTION("gated to the Gaussian likelihood") {
    const std::vector<double> resid(4, 0.0);
    const std::vector<double> beta(2, 0.0);
    const std::vector<double> s2(2, 1.0);
    REQUIRE_THROWS_AS(update_sigma2(Likelihood::RobustLaplace, resid, beta, 1.0,
                                    s2, 1.0, 2.0, rng),
                      config_error);
  }
  SECTION("monte carlo mean matches scale/(shape-1)") {
    const std::vector<double> resid = {1.2, -0.4, 0.9, 2.0};
    const std::vector<double> beta = {0.5, -1.0};
    const std::vector<double> s2 = {0.7, 1.8};
    double mean = 0.0, shape = 0.0, scale = 0.0;
    const int reps = 1000000;
    for (int i = 0; i < reps; ++i) {
      const auto d = update_sigma2(Likelihood::Gaussian, resid, beta, 0.9, s2,
                                   2.0, 1.0, rng);
      mean += d.value;
      shape = d.shape;
      scale = d.scale;
    }
    mean /= reps;
    REQUIRE(mean == Catch::Approx(scale / (shape - 1.0)).epsilon(0.005));
  }
  SECTION("conditional matches the grid-normalized joint kernel") {
    const std::vector<double> resid = {1.2, -0.4, 0.9};
    const std::vector<double> beta = {0.5, -1.0};
    const std::vector<double> s2 = {0.7, 1.8};
    const double lambda2 = 0.9, e = 1.0, f = 1.0;
    const auto d = update_sigma2(Likelihood::Gaussian, resid, beta, lambda2,
                                 s2, e, f, rng);
    const double tv = oracle::tv_against_log_density(
        [&](double sig2) {
          double lp = -(e + 1.0) * std::log(sig2) - f / sig2;
          for (double r : resid) {
            lp += -0.5 * std::log(sig2) - r * r / (2.0 * sig2);
          }
          for (std::size_t j = 0; j < beta.size(); ++j) {
            lp += -0.5 * std::log(sig2) -
                  beta[j] * beta[j] / (2.0 * sig2 * lambda2 * s2[j]);
          }
          return lp;
        },
        [&](double sig2) {
          return std::exp(-(d.shape + 1.0) * std::log(sig2) - d.scale / sig2 +
                          d.shape * std::log(d.scale) - std::lgamma(d.shape));
        },
        1e-4, 60.0, 100000);
    REQUIRE(tv < 1e-3);
  }
}

TEST_CASE("local scale conditionals") {
  RngStream rng(108);
  SECTION("s2 scale arithmetic") {
    auto d = update_s2_j(0.0, 1.0, 1.0, Likelihood::RobustLaplace, {}, rng);
    REQUIRE(d.shape == 1.0);
    REQUIRE(d.scale == Catch::Approx(1.0));
    d = update_s2_j(2.0, 1.0, 0.5, Likelihood::RobustLaplace, {}, rng);
    REQUIRE(d.scale == Catch::Approx(4.0));
    d = update_s2_j(2.0, 1.0, 0.5, Likelihood::Gaussian, 2.0, rng);
    REQUIRE(d.scale == Catch::Approx(3.0));  // 4/(2*1*2) + 2
  }
  SECTION("sigma2 required under the Gaussian likelihood") {
    REQUIRE_THROWS_AS(update_s2_j(1.0, 1.0, 1.0, Likelihood::Gaussian, {}, rng),
                      config_error);
  }
  SECTION("reciprocal of an InvGamma(1, b) draw is exponential with rate b") {
    const double scale = 2.7;
    std::vector<double> recip(1000000);
    for (auto& x : recip) {
      x = 1.0 / update_s2_j(std::sqrt(2.0 * scale - 2.0), 1.0, 1.0,
                            Likelihood::RobustLaplace, {}, rng).value;
    }
    const double ks = oracle::ks_statistic(recip, [&](double x) {
      return oracle::gamma_cdf(x, 1.0, scale);
    });
    REQUIRE(ks < 0.002);
  }
  SECTION("nu scale arithmetic") {
    auto d = update_nu_j(1.0, 1.0, rng);
    REQUIRE(d.shape == 1.0);
    REQUIRE(d.scale == Catch::Approx(2.0));
    d = update_nu_j(0.25, 1.0 / 0.5, rng);  // horseshoe+ with phi2 = 0.5
    REQUIRE(d.scale == Catch::Approx(6.0));
  }
  SECTION("horseshoe+ layers are gated and shape one") {
    auto d = update_phi2_j(Prior::HorseshoePlus, 1.0, 1.0, rng);
    REQUIRE(d.shape == 1.0);
    REQUIRE(d.scale == Catch::Approx(2.0));
    d = update_zeta_j(Prior::HorseshoePlus, 0.5, rng);
    REQUIRE(d.scale == Catch::Approx(3.0));
    REQUIRE_THROWS_AS(update_phi2_j(Prior::Horseshoe, 1.0, 1.0, rng),
                      config_error);
    REQUIRE_THROWS_AS(update_zeta_j(Prior::RegularizedHorseshoe, 1.0, rng),
                      config_error);
  }
}

TEST_CASE("global scale conditionals") {
  RngStream rng(109);
  SECTION("lambda2 shape and scale arithmetic") {
    const std::vector<double> beta(5, 0.0);
    const std::vector<double> s2(5, 1.0);
    const auto d = update_lambda2(beta, s2, 2.0, Likelihood::RobustLaplace, {},
                                  rng);
    REQUIRE(d.shape == Catch::Approx(3.0));
    REQUIRE(d.scale == Catch::Approx(0.5));
  }
  SECTION("gaussian variant divides by sigma2") {
    const std::vector<double> beta = {2.0};
    const std::vector<double> s2 = {1.0};
    const auto d =
        update_lambda2(beta, s2, 1.0, Likelihood::Gaussian, 4.0, rng);
    REQUIRE(d.scale == Catch::Approx(1.0 + 0.5));  // 1/xi1 + 4/(2*4*1)
    REQUIRE_THROWS_AS(
        update_lambda2(beta, s2, 1.0, Likelihood::Gaussian, {}, rng),
        config_error);
  }
  SECTION("monte carlo mean for p = 5") {
    const std::vector<double> beta = {0.5, -0.3, 1.0, 0.2, -0.7};
    const std::vector<double> s2 = {1.1, 0.4, 2.0, 0.9, 1.5};
    double mean = 0.0, shape = 0.0, scale = 0.0;
    const int reps = 1000000;
    for (int i = 0; i < reps; ++i) {
      const auto d =
          update_lambda2(beta, s2, 1.3, Likelihood::RobustLaplace, {}, rng);
      mean += d.value;
      shape = d.shape;
      scale = d.scale;
    }
    mean /= reps;
    REQUIRE(mean == Catch::Approx(scale / (shape - 1.0)).epsilon(0.005));
  }
  SECTION("xi1 scale arithmetic") {
    auto d = update_xi1(1.0, rng);
    REQUIRE(d.shape == 1.0);
    REQUIRE(d.scale == Catch::Approx(2.0));
    d = update_xi1(1e12, rng);
    REQUIRE(d.scale == Catch::Approx(1.0).epsilon(1e-9));
  }
  SECTION("b2 arithmetic and gating") {
    const std::vector<double> zero(3, 0.0);
    auto d = update_b2(Prior::RegularizedHorseshoe, zero, 1.0, 1.0, rng);
    REQUIRE(d.shape == Catch::Approx(2.0));
    REQUIRE(d.scale == Catch::Approx(0.5));
    const std::vector<double> ones(2, 1.0);
    d = update_b2(Prior::RegularizedHorseshoe, ones, 1.0, 1.0, rng);
    REQUIRE(d.scale == Catch::Approx(1.5));
    REQUIRE_THROWS_AS(update_b2(Prior::Horseshoe, ones, 1.0, 1.0, rng),
                      config_error);

    double mean = 0.0, shape = 0.0, scale = 0.0;
    const std::vector<double> beta = {1.0, -2.0, 0.5, 0.3, 1.4};
    const int reps = 1000000;
    for (int i = 0; i < reps; ++i) {
      const auto dd =
          update_b2(Prior::RegularizedHorseshoe, beta, 3.0, 1.0, rng);
      mean += dd.value;
      shape = dd.shape;
      scale = dd.scale;
    }
    mean /= reps;
    REQUIRE(mean == Catch::Approx(scale / (shape - 1.0)).epsilon(0.005));
  }
}

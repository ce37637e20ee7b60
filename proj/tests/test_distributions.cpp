#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hsreg/distributions.hpp"
#include "hsreg/rng.hpp"
#include "support/oracles.hpp"

using namespace hsreg;

namespace {

std::vector<double> draw_many(std::size_t count,
                              const std::function<double(RngStream&)>& fn,
                              std::uint64_t seed, std::uint64_t stream = 0) {
  RngStream rng(seed, stream);
  std::vector<double> out(count);
  for (auto& x : out) x = fn(rng);
  return out;
}

}  // namespace

TEST_CASE("rng stream determinism and independence") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  RngStream c(42, 8);
  RngStream d(42, 7);
  int same = 0;
  for (int i = 0; i < 1000; ++i) {
    if (c.next_u64() == d.next_u64()) ++same;
  }
  REQUIRE(same == 0);

  // cross-stream correlation of uniforms near zero
  RngStream s1(99, 0), s2(99, 1);
  const std::size_t n = 100000;
  double sum_xy = 0.0, sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_yy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = s1.next_uniform();
    const double y = s2.next_uniform();
    sum_xy += x * y;
    sum_x += x;
    sum_y += y;
    sum_xx += x * x;
    sum_yy += y * y;
  }
  const double nd = static_cast<double>(n);
  const double cov = sum_xy / nd - (sum_x / nd) * (sum_y / nd);
  const double vx = sum_xx / nd - (sum_x / nd) * (sum_x / nd);
  const double vy = sum_yy / nd - (sum_y / nd) * (sum_y / nd);
  REQUIRE(std::abs(cov / std::sqrt(vx * vy)) < 0.02);
}

TEST_CASE("normal sampler") {
  RngStream rng(1);
  SECTION("degenerate scale stays at the mean") {
    for (int i = 0; i < 100; ++i) {
      REQUIRE(std::abs(sample_normal(0.0, 1e-300, rng)) < 1e-290);
    }
  }
  SECTION("moment checks at one million draws") {
    auto draws = draw_many(1000000, [](RngStream& r) {
      return sample_normal(3.0, 2.0, r);
    }, 11);
    REQUIRE(oracle::mean_of(draws) == Catch::Approx(3.0).margin(0.01));
    auto centered = draw_many(1000000, [](RngStream& r) {
      return sample_normal(0.0, 2.0, r);
    }, 12);
    REQUIRE(oracle::variance_of(centered) == Catch::Approx(4.0).margin(0.05));
  }
  SECTION("parameter errors") {
    REQUIRE_THROWS_AS(sample_normal(0.0, 0.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_normal(0.0, -1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_normal(0.0, std::nan(""), rng), std::invalid_argument);
  }
}

TEST_CASE("gamma sampler (shape-rate)") {
  SECTION("mean of Gamma(7, 3.5) is 2") {
    auto draws = draw_many(1000000, [](RngStream& r) {
      return sample_gamma(7.0, 3.5, r);
    }, 21);
    REQUIRE(oracle::mean_of(draws) == Catch::Approx(2.0).margin(0.01));
    for (double x : draws) REQUIRE(x > 0.0);
  }
  SECTION("shape 1 reduces to the exponential law") {
    const double rate = 2.5;
    auto draws = draw_many(1000000, [rate](RngStream& r) {
      return sample_gamma(1.0, rate, r);
    }, 22);
    const double at = std::log(2.0) / rate;
    std::size_t below = 0;
    for (double x : draws) below += x <= at;
    REQUIRE(static_cast<double>(below) / 1e6 == Catch::Approx(0.5).margin(0.005));
  }
  SECTION("sub-unit shapes stay positive") {
    auto draws = draw_many(200000, [](RngStream& r) {
      return sample_gamma(0.5, 1.0, r);
    }, 23);
    for (double x : draws) REQUIRE(x > 0.0);
  }
  SECTION("parameter errors") {
    RngStream rng(2);
    REQUIRE_THROWS_AS(sample_gamma(0.0, 1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_gamma(1.0, 0.0, rng), std::invalid_argument);
  }
}

TEST_CASE("inverse-gamma sampler (shape-scale)") {
  SECTION("mean of InvGamma(3, 4) is 2") {
    auto draws = draw_many(1000000, [](RngStream& r) {
      return sample_inverse_gamma(3.0, 4.0, r);
    }, 31);
    REQUIRE(oracle::mean_of(draws) == Catch::Approx(2.0).margin(0.02));
    for (double x : draws) REQUIRE(x > 0.0);
  }
  SECTION("reciprocal draws follow Gamma(a, rate=b)") {
    const double a = 2.5, b = 1.7;
    auto recip = draw_many(1000000, [a, b](RngStream& r) {
      return 1.0 / sample_inverse_gamma(a, b, r);
    }, 32);
    const double ks = oracle::ks_statistic(recip, [a, b](double x) {
      return oracle::gamma_cdf(x, a, b);
    });
    REQUIRE(ks < 0.002);

    auto direct = draw_many(1000000, [a, b](RngStream& r) {
      return sample_gamma(a, b, r);
    }, 33);
    REQUIRE(oracle::ks_two_sample(recip, direct) < 0.002);
  }
  SECTION("parameter errors") {
    RngStream rng(3);
    REQUIRE_THROWS_AS(sample_inverse_gamma(-1.0, 1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_inverse_gamma(1.0, -1.0, rng), std::invalid_argument);
  }
}

TEST_CASE("inverse-gaussian sampler (mean, shape)") {
  auto draws = draw_many(1000000, [](RngStream& r) {
    return sample_inverse_gaussian(2.0, 4.0, r);
  }, 41);
  SECTION("mean and variance") {
    REQUIRE(oracle::mean_of(draws) == Catch::Approx(2.0).margin(0.01));
    // Var = mean^3 / shape = 8/4 = 2
    REQUIRE(oracle::variance_of(draws) == Catch::Approx(2.0).margin(0.05));
  }
  SECTION("support and parameter errors") {
    for (double x : draws) REQUIRE(x > 0.0);
    RngStream rng(4);
    REQUIRE_THROWS_AS(sample_inverse_gaussian(0.0, 1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_inverse_gaussian(1.0, 0.0, rng), std::invalid_argument);
  }
}

TEST_CASE("exponential sampler (rate)") {
  auto draws = draw_many(1000000, [](RngStream& r) {
    return sample_exponential(2.0, r);
  }, 51);
  REQUIRE(oracle::mean_of(draws) == Catch::Approx(0.5).margin(0.005));
  const double at = std::log(2.0) / 2.0;
  std::size_t below = 0;
  for (double x : draws) {
    REQUIRE(x > 0.0);
    below += x <= at;
  }
  REQUIRE(static_cast<double>(below) / 1e6 == Catch::Approx(0.5).margin(0.005));
  RngStream rng(5);
  REQUIRE_THROWS_AS(sample_exponential(0.0, rng), std::invalid_argument);
}

TEST_CASE("simulation error laws") {
  SECTION("standard normal moments") {
    auto draws = draw_many(1000000, [](RngStream& r) {
      return sample_error(ErrorKind::StdNormal, r);
    }, 61);
    REQUIRE(oracle::mean_of(draws) == Catch::Approx(0.0).margin(0.005));
    REQUIRE(oracle::variance_of(draws) == Catch::Approx(1.0).margin(0.01));
  }
  SECTION("laplace peak density at zero") {
    auto draws = draw_many(4000000, [](RngStream& r) {
      return sample_error(ErrorKind::Laplace, r);
    }, 62);
    const double h = 0.01;
    std::size_t inside = 0;
    for (double x : draws) inside += std::abs(x) <= h;
    const double density = static_cast<double>(inside) / 4e6 / (2.0 * h);
    REQUIRE(density == Catch::Approx(0.5).margin(0.01));
  }
  SECTION("lognormal support") {
    auto draws = draw_many(100000, [](RngStream& r) {
      return sample_error(ErrorKind::Lognormal, r);
    }, 63);
    for (double x : draws) REQUIRE(x > 0.0);
  }
  SECTION("contaminated normal reads 3 as a variance by default") {
    auto draws = draw_many(2000000, [](RngStream& r) {
      return sample_error(ErrorKind::MixtureNormal, r);
    }, 64);
    // 0.8 * 1 + 0.2 * 3 = 1.4
    REQUIRE(oracle::variance_of(draws) == Catch::Approx(1.4).margin(0.02));
    auto sd_read = draw_many(2000000, [](RngStream& r) {
      return sample_error(ErrorKind::MixtureNormal, r, MixtureScale::StdDev);
    }, 65);
    // 0.8 * 1 + 0.2 * 9 = 2.6
    REQUIRE(oracle::variance_of(sd_read) == Catch::Approx(2.6).margin(0.03));
  }
  SECTION("t(2) is heavy tailed but symmetric") {
    auto draws = draw_many(1000000, [](RngStream& r) {
      return sample_error(ErrorKind::StudentT2, r);
    }, 66);
    std::size_t positive = 0;
    for (double x : draws) positive += x > 0.0;
    REQUIRE(static_cast<double>(positive) / 1e6 == Catch::Approx(0.5).margin(0.002));
  }
  SECTION("unknown kind rejected") {
    REQUIRE_THROWS_AS(error_kind_from_int(0), std::invalid_argument);
    REQUIRE_THROWS_AS(error_kind_from_int(6), std::invalid_argument);
  }
}

TEST_CASE("cholesky factorization") {
  SECTION("identity") {
    Matrix eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    const Matrix chol = cholesky_lower(eye);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        REQUIRE(chol(i, j) == (i == j ? 1.0 : 0.0));
      }
    }
  }
  SECTION("two-by-two AR(1) closed form") {
    Matrix cov(2, 2);
    cov(0, 0) = cov(1, 1) = 1.0;
    cov(0, 1) = cov(1, 0) = 0.5;
    const Matrix chol = cholesky_lower(cov);
    REQUIRE(chol(0, 0) == Catch::Approx(1.0));
    REQUIRE(chol(1, 0) == Catch::Approx(0.5));
    REQUIRE(chol(0, 1) == 0.0);
    REQUIRE(chol(1, 1) == Catch::Approx(std::sqrt(0.75)));
  }
  SECTION("random positive-definite reconstruction") {
    const std::size_t p = 10;
    RngStream rng(71);
    Matrix a(p, p);
    for (auto& v : a.data) v = sample_normal(0.0, 1.0, rng);
    Matrix cov(p, p, 0.0);  // A A^T + 0.5 I
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        double s = i == j ? 0.5 : 0.0;
        for (std::size_t k = 0; k < p; ++k) s += a(i, k) * a(j, k);
        cov(i, j) = s;
      }
    }
    const Matrix chol = cholesky_lower(cov);
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) s += chol(i, k) * chol(j, k);
        err += (s - cov(i, j)) * (s - cov(i, j));
        norm += cov(i, j) * cov(i, j);
      }
    }
    REQUIRE(std::sqrt(err / norm) < 1e-10);
  }
  SECTION("non positive definite names the failing pivot") {
    Matrix bad(2, 2);
    bad(0, 0) = 1.0;
    bad(0, 1) = bad(1, 0) = 2.0;
    bad(1, 1) = 1.0;
    REQUIRE_THROWS_WITH(cholesky_lower(bad),
                        Catch::Matchers::ContainsSubstring("pivot 1"));
  }
}

TEST_CASE("multivariate normal rows") {
  SECTION("zero factor gives the zero vector") {
    Matrix zero(3, 3, 0.0);
    RngStream rng(81);
    std::vector<double> out(3);
    sample_mvn_row(zero, rng, out);
    for (double v : out) REQUIRE(v == 0.0);
  }
  SECTION("identity factor is componentwise standard normal") {
    Matrix eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1.0;
    RngStream rng(82);
    std::vector<double> x(2);
    std::vector<double> first(100000), second(100000);
    for (std::size_t i = 0; i < first.size(); ++i) {
      sample_mvn_row(eye, rng, x);
      first[i] = x[0];
      second[i] = x[1];
    }
    REQUIRE(oracle::mean_of(first) == Catch::Approx(0.0).margin(0.02));
    REQUIRE(oracle::variance_of(first) == Catch::Approx(1.0).margin(0.02));
    REQUIRE(oracle::variance_of(second) == Catch::Approx(1.0).margin(0.02));
  }
  SECTION("AR(1) rho=0.5 lag-two correlation is 0.25") {
    Matrix cov(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) cov(i, j) = std::pow(0.5, std::abs(i - j));
    }
    const Matrix chol = cholesky_lower(cov);
    RngStream rng(83);
    std::vector<double> x(3);
    double s13 = 0.0, s1 = 0.0, s3 = 0.0, s11 = 0.0, s33 = 0.0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) {
      sample_mvn_row(chol, rng, x);
      s13 += x[0] * x[2];
      s1 += x[0];
      s3 += x[2];
      s11 += x[0] * x[0];
      s33 += x[2] * x[2];
    }
    const double nd = static_cast<double>(n);
    const double corr = (s13 / nd - s1 / nd * s3 / nd) /
                        std::sqrt((s11 / nd - s1 / nd * s1 / nd) *
                                  (s33 / nd - s3 / nd * s3 / nd));
    REQUIRE(corr == Catch::Approx(0.25).margin(0.02));
  }
}

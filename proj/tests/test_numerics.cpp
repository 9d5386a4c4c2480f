#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fedsurv/error.hpp"
#include "fedsurv/numerics.hpp"
#include "oracles.hpp"

namespace nm = fedsurv::numerics;

namespace {

TEST(BinomialCdf, EmptySampleIsWholeMass) { EXPECT_EQ(nm::binomial_cdf(0, 0, 0.5), 1.0); }

TEST(BinomialCdf, FullSupportIsOne) {
  for (std::int64_t n : {1, 7, 60, 999}) {
    for (double rho : {0.0, 0.01, 0.5, 0.99, 1.0}) EXPECT_EQ(nm::binomial_cdf(n, n, rho), 1.0);
  }
}

TEST(BinomialCdf, RejectsBadArguments) {
  EXPECT_THROW(nm::binomial_cdf(5, 4, 0.5), fedsurv::DomainError);
  EXPECT_THROW(nm::binomial_cdf(1, 4, 1.5), fedsurv::DomainError);
  EXPECT_THROW(nm::binomial_cdf(1, 4, -0.1), fedsurv::DomainError);
}

TEST(BinomialCdf, DegenerateRates) {
  EXPECT_EQ(nm::binomial_cdf(0, 10, 0.0), 1.0);
  EXPECT_EQ(nm::binomial_cdf(9, 10, 1.0), 0.0);
}

TEST(BinomialCdf, GoldenWindow) {
  // 61-term sum at 50 digits.
  const double rho = 4.0 / 5.3;
  EXPECT_NEAR(nm::binomial_cdf(40, 60, rho), 0.078781513086899471377, 1e-16);
  EXPECT_NEAR(nm::binomial_cdf(40, 60, rho),
              static_cast<double>(oracle::binomial_cdf(40, 60, rho)), 1e-15);
}

TEST(BinomialCdf, MatchesBruteForceSum) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> n_dist(1, 1000);
  std::uniform_real_distribution<double> rho_dist(0.01, 0.99);
  for (int i = 0; i < 400; ++i) {
    const auto n = n_dist(rng);
    const auto c = std::uniform_int_distribution<std::int64_t>(0, n)(rng);
    const double rho = rho_dist(rng);
    const double want = static_cast<double>(oracle::binomial_cdf(c, n, rho));
    EXPECT_NEAR(nm::binomial_cdf(c, n, rho), want, 1e-12) << "c=" << c << " n=" << n;
  }
}

TEST(BinomialCdf, NondecreasingInC) {
  for (double rho : {0.1, 0.4, 0.7547}) {
    double prev = 0.0;
    for (std::int64_t c = 0; c <= 300; ++c) {
      const double v = nm::binomial_cdf(c, 300, rho);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(LogBinomialCdf, FiniteDeepInTheTail) {
  const double rho = 0.9;
  const double v = nm::log_binomial_cdf(10, 5000, rho, 1.0 - rho);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, static_cast<double>(oracle::log_binomial_cdf(10, 5000, rho)), 1e-9 * std::abs(v));
}

TEST(LogBinomialPmf, MatchesLgamma) {
  for (std::int64_t n : {1, 5, 15, 16, 200, 5000}) {
    for (std::int64_t r : {std::int64_t{0}, n / 3, n}) {
      const double rho = 0.37;
      const auto want = oracle::log_choose(n, r) + static_cast<oracle::ld>(r) * std::log(0.37L) +
                        static_cast<oracle::ld>(n - r) * std::log(0.63L);
      EXPECT_NEAR(nm::log_binomial_pmf(r, n, rho, 1.0 - rho), static_cast<double>(want),
                  1e-12 * std::max(1.0, std::abs(static_cast<double>(want))));
    }
  }
}

TEST(NormalCdf, Anchors) {
  EXPECT_EQ(nm::normal_cdf(0.0), 0.5);
  EXPECT_NEAR(nm::normal_cdf(40.0), 1.0, 1e-15);
  EXPECT_NEAR(nm::normal_cdf(-1.6449), 0.049995217468346302713, 1e-16);
}

TEST(NormalCdf, MatchesErfReference) {
  for (double z = -10.0; z <= 10.0; z += 0.0625) {
    EXPECT_NEAR(nm::normal_cdf(z), static_cast<double>(oracle::normal_cdf(z)), 1e-14);
  }
}

TEST(NormalCdf, Symmetry) {
  for (double z = -10.0; z <= 10.0; z += 0.1) {
    EXPECT_NEAR(nm::normal_cdf(z) + nm::normal_cdf(-z), 1.0, 1e-14);
  }
}

TEST(NormalQuantile, Anchors) {
  EXPECT_EQ(nm::normal_quantile(0.5), 0.0);
  EXPECT_NEAR(nm::normal_quantile(0.05), -1.6448536269514727149, 1e-14);
  EXPECT_NEAR(nm::normal_quantile(0.05), static_cast<double>(oracle::normal_quantile(0.05L)), 1e-13);
}

TEST(NormalQuantile, RoundTrip) {
  EXPECT_NEAR(nm::normal_cdf(nm::normal_quantile(0.123)), 0.123, 1e-12);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
  for (int i = 0; i < 2000; ++i) {
    const double p = u(rng);
    EXPECT_NEAR(nm::normal_cdf(nm::normal_quantile(p)), p, 1e-12);
  }
}

TEST(NormalQuantile, RejectsEndpoints) {
  EXPECT_THROW(nm::normal_quantile(0.0), fedsurv::DomainError);
  EXPECT_THROW(nm::normal_quantile(1.0), fedsurv::DomainError);
}

TEST(ChiSquareSf, Anchors) {
  EXPECT_EQ(nm::chi_square_sf(0.0, 3.0), 1.0);
  EXPECT_NEAR(nm::chi_square_sf(11.9829, 4.0), 0.01747887926529465952, 1e-15);
  for (double x : {50.0, 200.0, 700.0}) {
    EXPECT_NEAR(nm::chi_square_sf(x, 2.0) / std::exp(-x / 2.0), 1.0, 1e-10);
  }
}

TEST(ChiSquareSf, RejectsNegativeArguments) {
  EXPECT_THROW(nm::chi_square_sf(-1.0, 2.0), fedsurv::DomainError);
  EXPECT_THROW(nm::chi_square_sf(1.0, -2.0), fedsurv::DomainError);
}

TEST(ChiSquareSf, EvenDfClosedForm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int sites = 1 + trial % 12;
    double x = 0.0;
    for (int i = 0; i < sites; ++i) x -= 2.0 * std::log(u(rng));
    EXPECT_NEAR(nm::chi_square_sf(x, 2.0 * sites),
                static_cast<double>(oracle::chi_square_sf_even(x, 2 * sites)), 1e-12);
  }
}

TEST(ChiSquareSf, CdfComplement) {
  for (double df : {0.3, 1.0, 4.0, 17.5}) {
    for (double x : {0.01, 1.0, 5.0, 30.0}) {
      EXPECT_NEAR(nm::chi_square_sf(x, df) + nm::chi_square_cdf(x, df), 1.0, 1e-14);
    }
  }
}

TEST(GammaQuantile, ClosedForms) {
  for (double q : {0.01, 0.3, 0.5, 0.95, 0.999}) {
    EXPECT_NEAR(nm::gamma_quantile(q, 1.0, 0.5), -2.0 * std::log1p(-q), 1e-12);
  }
  EXPECT_NEAR(nm::gamma_quantile(0.5, 1.0, 1.0), std::log(2.0), 1e-14);
}

TEST(GammaQuantile, ChiSquareOneDf) {
  // Bisection on the chi-square(1) CDF at 50 digits.
  EXPECT_NEAR(nm::gamma_quantile(0.9, 0.5, 0.5), 2.7055434540954145671, 1e-12);
  EXPECT_NEAR(nm::gamma_quantile(0.9, 0.5, 0.5),
              static_cast<double>(oracle::gamma_quantile_upper(0.1L, 0.5L, 0.5L)), 1e-10);
}

TEST(GammaQuantile, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uq(1e-4, 1.0 - 1e-4);
  std::uniform_real_distribution<double> ulog(-4.0, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const double q = uq(rng);
    const double shape = std::exp(ulog(rng));
    const double rate = std::exp(ulog(rng) / 2.0);
    const double x = nm::gamma_quantile(q, shape, rate);
    EXPECT_NEAR(nm::gamma_cdf(x, shape, rate), q, 1e-10) << "shape=" << shape;
  }
}

TEST(GammaQuantileUpper, TinyTailProbabilities) {
  for (double shape : {0.05, 0.4, 1.6, 8.0}) {
    for (double p : {1e-15, 1e-8, 0.05, 0.5}) {
      const double x = nm::gamma_quantile_upper(p, shape, 0.5);
      EXPECT_NEAR(nm::gamma_sf(x, shape, 0.5) / p, 1.0, 1e-9) << "shape=" << shape << " p=" << p;
    }
  }
  EXPECT_NEAR(nm::gamma_quantile_upper(0.05, 1.6, 0.5),
              static_cast<double>(oracle::gamma_quantile_upper(0.05L, 1.6L, 0.5L)), 1e-10);
}

TEST(GammaQuantile, RejectsBadArguments) {
  EXPECT_THROW(nm::gamma_quantile(0.0, 1.0, 1.0), fedsurv::DomainError);
  EXPECT_THROW(nm::gamma_quantile(1.0, 1.0, 1.0), fedsurv::DomainError);
  EXPECT_THROW(nm::gamma_quantile(0.5, 0.0, 1.0), fedsurv::DomainError);
  EXPECT_THROW(nm::gamma_quantile(0.5, 1.0, -1.0), fedsurv::DomainError);
}

TEST(ClampProbability, Range) {
  EXPECT_EQ(nm::clamp_probability(-1e-17), 0.0);
  EXPECT_EQ(nm::clamp_probability(1.0 + 1e-15), 1.0);
  EXPECT_EQ(nm::clamp_probability(0.25), 0.25);
  EXPECT_THROW(nm::clamp_probability(std::nan("")), fedsurv::DomainError);
}

}  // namespace

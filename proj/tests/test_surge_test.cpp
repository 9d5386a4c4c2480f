#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "fedsurv/error.hpp"
#include "fedsurv/numerics.hpp"
#include "fedsurv/surge_test.hpp"
#include "oracles.hpp"

using fedsurv::PowerScenario;
using fedsurv::SurgeHypothesis;
using fedsurv::SurgeWindow;
using fedsurv::binomial_kl;
using fedsurv::diagnostics;

namespace {

const SurgeHypothesis kHyp{0.3, 4, 0.05};

TEST(SurgeHypothesis, DerivedParameters) {
  EXPECT_DOUBLE_EQ(kHyp.rho(), 4.0 / 5.3);
  EXPECT_DOUBLE_EQ(kHyp.q(), 1.3 / 5.3);
  EXPECT_NEAR(kHyp.rho() + kHyp.q(), 1.0, 1e-15);
}

TEST(SurgeHypothesis, RejectsInvalid) {
  EXPECT_THROW(SurgeHypothesis(-0.1, 4), fedsurv::ConfigError);
  EXPECT_THROW(SurgeHypothesis(0.3, 0), fedsurv::ConfigError);
  EXPECT_THROW(SurgeHypothesis(0.3, 4, 0.0), fedsurv::ConfigError);
  EXPECT_THROW(SurgeHypothesis(0.3, 4, 1.0), fedsurv::ConfigError);
}

TEST(ExactPValue, ZeroTestCountIsOne) {
  EXPECT_EQ(exact_p_value(SurgeWindow{{5, 5, 5, 5}, 0}, kHyp), 1.0);
}

TEST(ExactPValue, EmptyWindowIsOne) {
  EXPECT_EQ(exact_p_value(SurgeWindow{{0, 0, 0, 0}, 0}, kHyp), 1.0);
}

TEST(ExactPValue, GoldenWindow) {
  const double p = exact_p_value(SurgeWindow{{10, 10, 10, 10}, 20}, kHyp);
  EXPECT_GT(p, 0.05);
  EXPECT_LT(p, 0.11);
  EXPECT_NEAR(p, 0.078781513086899471377, 1e-16);
}

TEST(ExactPValue, EqualsUpperTailOfTestCount) {
  // P[Bin(n, rho) <= c] == P[Bin(n, q) >= k_T].
  for (std::int64_t k : {0, 3, 17, 40}) {
    const SurgeWindow w{{6, 9, 4, 11}, k};
    EXPECT_NEAR(exact_p_value(w, kHyp),
                static_cast<double>(oracle::binomial_upper(k, w.total(), kHyp.q())), 1e-13);
  }
}

TEST(ExactPValue, WindowLengthMismatch) {
  EXPECT_THROW(exact_p_value(SurgeWindow{{1, 2, 3}, 4}, kHyp), fedsurv::ConfigError);
}

TEST(ExactPValue, NonincreasingInTestCount) {
  double prev = 1.0;
  for (std::int64_t k = 0; k < 120; ++k) {
    const double p = exact_p_value(SurgeWindow{{12, 8, 15, 10}, k}, kHyp);
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(ExactPValue, LogFormFiniteWherePlainUnderflows) {
  const double lp = log_exact_p_value(10, 6000, kHyp);
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_EQ(exact_p_value(10, 6000, kHyp), 0.0);
  EXPECT_NEAR(lp, static_cast<double>(oracle::log_binomial_cdf(10, 6000, kHyp.rho())),
              1e-9 * std::abs(lp));
}

TEST(ExactPValue, SuperUniformUnderNull) {
  std::mt19937_64 rng(2024);
  const int reps = 40000;
  const double lambda_b = 12.0;
  std::poisson_distribution<std::int64_t> base(lambda_b);
  std::poisson_distribution<std::int64_t> test(lambda_b * (1.0 + kHyp.theta()));
  std::vector<double> ps;
  ps.reserve(reps);
  for (int i = 0; i < reps; ++i) {
    SurgeWindow w;
    for (int j = 0; j < 4; ++j) w.baseline_counts.push_back(base(rng));
    w.test_count = test(rng);
    ps.push_back(exact_p_value(w, kHyp));
  }
  for (double alpha : {0.01, 0.05, 0.1}) {
    const double rate =
        static_cast<double>(std::count_if(ps.begin(), ps.end(), [&](double p) { return p <= alpha; })) /
        reps;
    EXPECT_LE(rate, alpha + 3.0 * std::sqrt(alpha * (1 - alpha) / reps)) << "alpha=" << alpha;
  }
}

TEST(GaussianPValue, CentredWindowIsHalf) {
  // theta = 1, l = 3 gives rho = 0.6; c = 30 of n = 50.
  const SurgeHypothesis hyp(1.0, 3);
  EXPECT_NEAR(gaussian_p_value(30, 50, hyp, false), 0.5, 1e-15);
}

TEST(GaussianPValue, YatesShiftsUp) {
  for (std::int64_t c = 0; c < 60; c += 7) {
    EXPECT_GE(gaussian_p_value(c, 60, kHyp, true), gaussian_p_value(c, 60, kHyp, false));
  }
}

TEST(GaussianPValue, EmptyWindowIsOne) {
  EXPECT_EQ(gaussian_p_value(0, 0, kHyp, false), 1.0);
  EXPECT_EQ(gaussian_p_value(0, 0, kHyp, true), 1.0);
}

TEST(GaussianPValue, GoldenWindow) {
  const SurgeWindow w{{10, 10, 10, 10}, 20};
  EXPECT_NEAR(gaussian_p_value(w, kHyp, false), 0.056461830357964371044, 1e-15);
  EXPECT_NEAR(gaussian_p_value(w, kHyp, true), 0.075620592055366972694, 1e-15);
}

TEST(GaussianPValue, ErrorWithinFirstOrderTerm) {
  const SurgeWindow w{{10, 10, 10, 10}, 20};
  const double exact = exact_p_value(w, kHyp);
  const auto d = diagnostics(w, kHyp);
  const double slack = 1.0 / static_cast<double>(w.total());
  EXPECT_LE(std::abs(gaussian_p_value(w, kHyp, false) - exact),
            std::abs(d.gaussian_first_order_error) + slack);
}

TEST(CriticalValue, GoldenAndExhaustiveScan) {
  EXPECT_EQ(critical_value(60, kHyp), 21);
  for (std::int64_t n : {1, 5, 60, 137, 400}) {
    std::int64_t scan = n + 1;
    for (std::int64_t k = 0; k <= n; ++k) {
      if (oracle::binomial_upper(k, n, kHyp.q()) <= 0.05L) {
        scan = k;
        break;
      }
    }
    EXPECT_EQ(critical_value(n, kHyp), scan) << "n=" << n;
  }
}

TEST(CriticalValue, AlphaOneRejectsEverything) {
  EXPECT_EQ(critical_value(60, kHyp, 1.0), 0);
  EXPECT_EQ(critical_value(60, kHyp, 1.0 - 1e-12), 1);
}

TEST(CriticalValue, NoRejectionRegionGivesNPlusOne) {
  // P[Bin(1, q) >= 1] = q > alpha.
  EXPECT_EQ(critical_value(1, kHyp), 2);
}

TEST(CriticalValue, MonotoneInAlpha) {
  for (std::int64_t n : {20, 100, 500}) {
    std::int64_t prev = n + 1;
    for (double a = 0.001; a < 1.0; a += 0.01) {
      const auto k = critical_value(n, kHyp, a);
      EXPECT_LE(k, prev);
      prev = k;
    }
  }
}

TEST(PowerExact, Golden) {
  const PowerScenario scn{200, 0.6, kHyp};
  EXPECT_EQ(critical_value(200, kHyp), 60);
  EXPECT_NEAR(power_exact(scn), 0.35253818350343176363, 1e-14);
}

TEST(PowerExact, MonteCarloAgreement) {
  const PowerScenario scn{200, 0.6, kHyp};
  const double q_alt = 1.6 / 5.6;
  const auto k_cr = critical_value(200, kHyp);
  std::mt19937_64 rng(99);
  std::binomial_distribution<std::int64_t> draw(200, q_alt);
  const int reps = 1'000'000;
  int hits = 0;
  for (int i = 0; i < reps; ++i) hits += draw(rng) >= k_cr ? 1 : 0;
  const double freq = static_cast<double>(hits) / reps;
  const double power = power_exact(scn);
  EXPECT_LE(std::abs(freq - power), 3.0 * std::sqrt(power * (1 - power) / reps));
}

TEST(PowerExact, NullBoundaryIsConservative) {
  for (std::int64_t n : {10, 60, 200, 1000}) {
    EXPECT_LE(power_exact(PowerScenario{n, 0.3, kHyp}), 0.05);
  }
}

TEST(PowerExact, LargeGrowthSaturates) {
  EXPECT_GT(power_exact(PowerScenario{200, 1e6, kHyp}), 1.0 - 1e-12);
}

TEST(PowerExact, MonotoneInGrowthAndSize) {
  for (std::int64_t n : {50, 200, 800}) {
    double prev = 0.0;
    for (double t = 0.0; t <= 2.0; t += 0.05) {
      const double p = power_exact(PowerScenario{n, t, kHyp});
      EXPECT_GE(p, prev - 1e-15);
      prev = p;
    }
  }
  // Power in n is only monotone up to the discreteness of k_cr; compare on
  // a coarse grid where the size gap dominates.
  for (double t : {0.5, 0.8, 1.2}) {
    double prev = 0.0;
    for (std::int64_t n : {50, 100, 200, 400, 800}) {
      const double p = power_exact(PowerScenario{n, t, kHyp});
      EXPECT_GE(p, prev);
      prev = p;
    }
  }
}

TEST(PowerApprox, GoldenTerms) {
  const auto a = power_approx(PowerScenario{200, 0.6, kHyp});
  EXPECT_NEAR(a.magnitude, 1.2656988551885602055, 1e-13);
  EXPECT_NEAR(a.type_one, -1.5665746659715154329, 1e-13);
  EXPECT_NEAR(a.continuity, -0.078262379212492639374, 1e-14);
  EXPECT_NEAR(a.power, 0.35229262404421085463, 1e-13);
  EXPECT_LE(std::abs(a.power - power_exact(PowerScenario{200, 0.6, kHyp})), 0.03);
}

TEST(PowerApprox, NullLimitIsAlpha) {
  const auto a = power_approx(PowerScenario{100'000'000, 0.3, kHyp});
  EXPECT_NEAR(a.power, 0.05, 1e-4);
  EXPECT_EQ(a.magnitude, 0.0);
}

TEST(PowerApprox, ContinuityTermNegative) {
  for (std::int64_t n : {1, 10, 1000}) {
    for (double t : {0.0, 0.3, 2.0}) EXPECT_LT(power_approx(PowerScenario{n, t, kHyp}).continuity, 0.0);
  }
}

TEST(PowerApprox, WithinThreeHundredthsOfExact) {
  double worst = 0.0;
  std::string where;
  for (int l : {2, 4, 8}) {
    const SurgeHypothesis hyp(0.3, l, 0.05);
    for (std::int64_t n : {100, 200, 500, 1000}) {
      for (int i = 0; i <= 14; ++i) {
        const PowerScenario scn{n, 0.3 + 0.05 * i, hyp};
        const double gap = std::abs(power_approx(scn).power - power_exact(scn));
        if (gap > worst) {
          worst = gap;
          where = "l=" + std::to_string(l) + " n=" + std::to_string(n) +
                  " theta'=" + std::to_string(scn.theta_alt);
        }
      }
    }
  }
  EXPECT_LE(worst, 0.03) << "worst at " << where;
}

TEST(Diagnostics, GoldenWindow) {
  const double rho = 4.0 / 5.3;
  const auto d = diagnostics(40, 60, rho);
  EXPECT_NEAR(d.kl, 0.019541656694172568441, 1e-15);
  EXPECT_NEAR(d.log_p_upper, -1.1724994016503541065, 1e-13);
  EXPECT_NEAR(d.log_p_lower, -3.5662452730413771036, 1e-13);
  const double lp = std::log(exact_p_value(40, 60, kHyp));
  EXPECT_LE(d.log_p_lower, lp);
  EXPECT_LE(lp, d.log_p_upper);
  EXPECT_GE(d.rounding_term, -0.5);
  EXPECT_LE(d.rounding_term, 0.5);
}

TEST(Diagnostics, ZeroDivergenceAtMatch) {
  // rho = 0.6 with c/n = 30/50.
  const auto d = diagnostics(30, 50, 0.6);
  EXPECT_NEAR(d.kl, 0.0, 1e-15);
  EXPECT_NEAR(d.log_p_upper, 0.0, 1e-13);
}

TEST(Diagnostics, KlDirection) {
  // D(c/n || rho), not D(rho || c/n).
  const double r = 40.0 / 60.0;
  const double rho = 4.0 / 5.3;
  const double forward = r * std::log(r / rho) + (1 - r) * std::log((1 - r) / (1 - rho));
  const double reverse = rho * std::log(rho / r) + (1 - rho) * std::log((1 - rho) / (1 - r));
  EXPECT_NEAR(binomial_kl(40, 60, rho), forward, 1e-15);
  EXPECT_GT(std::abs(binomial_kl(40, 60, rho) - reverse), 1e-3);
}

TEST(Diagnostics, BoundaryRejected) {
  EXPECT_THROW(diagnostics(0, 60, 0.5), fedsurv::DomainError);
  EXPECT_THROW(diagnostics(60, 60, 0.5), fedsurv::DomainError);
}

TEST(Diagnostics, BoundsHoldOnRandomInteriorPoints) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> n_dist(2, 2000);
  std::uniform_real_distribution<double> rho_dist(0.05, 0.95);
  int checked = 0;
  while (checked < 2000) {
    const auto n = n_dist(rng);
    const double rho = rho_dist(rng);
    const auto c = std::uniform_int_distribution<std::int64_t>(1, n - 1)(rng);
    if (static_cast<double>(c) / static_cast<double>(n) >= rho) continue;
    const auto d = diagnostics(c, n, rho);
    const double lp = fedsurv::numerics::log_binomial_cdf(c, n, rho, 1.0 - rho);
    EXPECT_LE(d.log_p_lower, lp) << c << "/" << n << " rho=" << rho;
    EXPECT_LE(lp, d.log_p_upper) << c << "/" << n << " rho=" << rho;
    ++checked;
  }
}

}  // namespace

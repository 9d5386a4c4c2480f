#include "fedsurv/surge_test.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fedsurv/error.hpp"
#include "fedsurv/numerics.hpp"

namespace fedsurv {

SurgeHypothesis::SurgeHypothesis(double theta, int baseline_len, double alpha)
    : theta_(theta), baseline_len_(baseline_len), alpha_(alpha) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw ConfigError("theta must be >= 0");
  if (baseline_len < 1) throw ConfigError("baseline length must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const double denom = 1.0 + theta + baseline_len;
  rho_ = baseline_len / denom;
  q_ = (1.0 + theta) / denom;
}

std::int64_t SurgeWindow::baseline_total() const {
  return std::accumulate(baseline_counts.begin(), baseline_counts.end(), std::int64_t{0});
}

std::int64_t SurgeWindow::total() const { return baseline_total() + test_count; }

namespace {

void check_window(const SurgeWindow& window, const SurgeHypothesis& hyp) {
  if (window.baseline_counts.size() != static_cast<std::size_t>(hyp.baseline_len())) {
    throw ConfigError("window has " + std::to_string(window.baseline_counts.size()) +
                      " baseline periods, hypothesis expects " +
                      std::to_string(hyp.baseline_len()));
  }
  if (window.test_count < 0) throw DomainError("test count must be nonnegative");
  for (auto k : window.baseline_counts) {
    if (k < 0) throw DomainError("baseline counts must be nonnegative");
  }
}

void check_counts(std::int64_t c, std::int64_t n) {
  if (c < 0 || n < 0 || c > n) throw DomainError("require 0 <= c <= n");
}

// P[Bin(n, q) >= k] via the complementary baseline-side tail.
double upper_tail(std::int64_t k, std::int64_t n, double rho, double q) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  return numerics::binomial_cdf(n - k, n, rho, q);
}

}  // namespace

double exact_p_value(std::int64_t c, std::int64_t n, const SurgeHypothesis& hyp) {
  check_counts(c, n);
  if (n == 0) return 1.0;
  return numerics::binomial_cdf(c, n, hyp.rho(), hyp.q());
}

double exact_p_value(const SurgeWindow& window, const SurgeHypothesis& hyp) {
  check_window(window, hyp);
  return exact_p_value(window.baseline_total(), window.total(), hyp);
}

double log_exact_p_value(std::int64_t c, std::int64_t n, const SurgeHypothesis& hyp) {
  check_counts(c, n);
  if (n == 0) return 0.0;
  return numerics::log_binomial_cdf(c, n, hyp.rho(), hyp.q());
}

double gaussian_z(std::int64_t c, std::int64_t n, const SurgeHypothesis& hyp, bool yates) {
  check_counts(c, n);
  if (n == 0) return 0.0;
  const double nd = static_cast<double>(n);
  const double shift = yates ? 0.5 : 0.0;
  return (static_cast<double>(c) + shift - hyp.rho() * nd) /
         std::sqrt(hyp.rho() * hyp.q() * nd);
}

double gaussian_p_value(std::int64_t c, std::int64_t n, const SurgeHypothesis& hyp, bool yates) {
  check_counts(c, n);
  if (n == 0) return 1.0;
  return numerics::normal_cdf(gaussian_z(c, n, hyp, yates));
}

double gaussian_p_value(const SurgeWindow& window, const SurgeHypothesis& hyp, bool yates) {
  check_window(window, hyp);
  return gaussian_p_value(window.baseline_total(), window.total(), hyp, yates);
}

std::int64_t critical_value(std::int64_t n, const SurgeHypothesis& hyp, double alpha) {
  if (n < 0) throw DomainError("n must be nonnegative");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  // The tail is nonincreasing in k; find the first k in [0, n + 1] at or below alpha.
  std::int64_t lo = 0;
  std::int64_t hi = n + 1;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (upper_tail(mid, n, hyp.rho(), hyp.q()) <= alpha) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

std::int64_t critical_value(std::int64_t n, const SurgeHypothesis& hyp) {
  return critical_value(n, hyp, hyp.alpha());
}

namespace {

struct AltProbabilities {
  double rho;
  double q;
};

AltProbabilities alternative(const PowerScenario& s) {
  if (s.n < 1) throw DomainError("power scenario needs n >= 1");
  if (!(s.theta_alt > -1.0) || !std::isfinite(s.theta_alt)) {
    throw DomainError("theta' must be finite and > -1");
  }
  const double l = s.hypothesis.baseline_len();
  const double denom = 1.0 + s.theta_alt + l;
  return {l / denom, (1.0 + s.theta_alt) / denom};
}

}  // namespace

double power_exact(const PowerScenario& scenario) {
  const auto alt = alternative(scenario);
  const std::int64_t k = critical_value(scenario.n, scenario.hypothesis);
  return upper_tail(k, scenario.n, alt.rho, alt.q);
}

PowerApproximation power_approx(const PowerScenario& scenario) {
  alternative(scenario);
  const auto& h = scenario.hypothesis;
  const double n = static_cast<double>(scenario.n);
  const double l = h.baseline_len();
  const double th = h.theta();
  const double ta = scenario.theta_alt;
  const double z_alpha = numerics::normal_quantile(1.0 - h.alpha());

  PowerApproximation out;
  out.magnitude = std::sqrt(n * l) * (ta - th) / ((1.0 + th + l) * std::sqrt(1.0 + ta));
  out.type_one =
      -z_alpha * (1.0 + ta + l) * std::sqrt(1.0 + th) / ((1.0 + th + l) * std::sqrt(1.0 + ta));
  out.continuity = -(1.0 + ta + l) / (2.0 * std::sqrt(n * l * (1.0 + ta)));
  out.power = numerics::normal_cdf(out.magnitude + out.type_one + out.continuity);
  return out;
}

double binomial_kl(std::int64_t c, std::int64_t n, double rho) {
  check_counts(c, n);
  if (n == 0) throw DomainError("kl needs n >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("kl needs 0 < rho < 1");
  const double x = static_cast<double>(c) / static_cast<double>(n);
  const double y = static_cast<double>(n - c) / static_cast<double>(n);
  double kl = 0.0;
  if (c > 0) kl += x * std::log(x / rho);
  if (c < n) kl += y * std::log(y / (1.0 - rho));
  return std::max(kl, 0.0);
}

ApproximationDiagnostics diagnostics(std::int64_t c, std::int64_t n, double rho) {
  check_counts(c, n);
  if (c == 0 || c == n) throw DomainError("tail bounds need an interior point 0 < c < n");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("diagnostics need 0 < rho < 1");

  const double nd = static_cast<double>(n);
  ApproximationDiagnostics d;
  d.kl = binomial_kl(c, n, rho);
  d.log_p_upper = -nd * d.kl;
  d.log_p_lower = d.log_p_upper - 0.5 * std::log(2.0 * nd);

  const double sd = std::sqrt(nd * rho * (1.0 - rho));
  const double z = (static_cast<double>(c) - nd * rho) / sd;
  // n rho + z sd reproduces c; snap the rounding noise so the fractional
  // part of an integer reads as 0, not 1 - ulp.
  double x = nd * rho + z * sd;
  if (std::abs(x - std::round(x)) < 1e-9 * std::max(1.0, std::abs(x))) x = std::round(x);
  d.rounding_term = 0.5 - (x - std::floor(x));
  d.gaussian_first_order_error =
      ((1.0 - 2.0 * rho) * (1.0 - z * z) / 6.0 + d.rounding_term) * numerics::normal_cdf(z) / sd;
  return d;
}

ApproximationDiagnostics diagnostics(const SurgeWindow& window, const SurgeHypothesis& hyp) {
  check_window(window, hyp);
  return diagnostics(window.baseline_total(), window.total(), hyp.rho());
}

}  // namespace fedsurv

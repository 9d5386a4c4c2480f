#include "fedsurv/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fedsurv/error.hpp"

namespace fedsurv::numerics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// lgamma(n + 1) - (n + 1/2) log n + n - log sqrt(2 pi) for n = 0..15.
constexpr std::array<double, 16> kStirlingRemainder = {
    0.0,
    0.08106146679532725821967026,
    0.04134069595540929409382208,
    0.02767792568499833914878929,
    0.02079067210376509311152277,
    0.01664469118982119216319487,
    0.01387612882307074799874573,
    0.01189670994589177009505572,
    0.01041126526197209649747857,
    0.009255462182712732917728637,
    0.008330563433362871256469319,
    0.007573675487951840794972024,
    0.006942840107209529865664153,
    0.006408994188004207068439631,
    0.005951370112758847735624416,
    0.00555473355196280137103869,
};

double stirling_remainder(std::int64_t n) {
  if (n < static_cast<std::int64_t>(kStirlingRemainder.size())) {
    return kStirlingRemainder[static_cast<std::size_t>(n)];
  }
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  const double x = static_cast<double>(n);
  const double xx = x * x;
  if (n > 500) return (s0 - s1 / xx) / x;
  if (n > 80) return (s0 - (s1 - s2 / xx) / xx) / x;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / xx) / xx) / xx) / x;
  return (s0 - (s1 - (s2 - (s3 - s4 / xx) / xx) / xx) / xx) / x;
}

// Deviance term x log(x / m) + m - x without cancellation near x == m.
double deviance(double x, double m) {
  if (std::abs(x - m) < 0.1 * (x + m)) {
    double v = (x - m) / (x + m);
    double sum = (x - m) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double next = sum + ej / (2 * j + 1);
      if (next == sum) return next;
      sum = next;
    }
    return sum;
  }
  return x * std::log(x / m) + m - x;
}

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1]");
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
}

// Monotone root finder in u = log x for tail(x) == target. `increasing`
// gives the direction of tail in x.
template <typename Tail, typename Slope>
double solve_in_log_space(Tail tail, Slope slope_du, double target, bool increasing,
                          double start) {
  auto residual = [&](double u) {
    const double r = tail(std::exp(u)) - target;
    return increasing ? r : -r;
  };
  constexpr double u_min = -744.0;
  constexpr double u_max = 709.0;

  double lo = std::clamp(std::log(start), u_min, u_max);
  double hi = lo;
  double r0 = residual(lo);
  if (r0 == 0.0) return std::exp(lo);
  double step = 1.0;
  if (r0 < 0.0) {
    for (;;) {
      hi = std::min(hi + step, u_max);
      if (residual(hi) >= 0.0) break;
      if (hi == u_max) return std::exp(u_max);
      lo = hi;
      step *= 2.0;
    }
  } else {
    for (;;) {
      lo = std::max(lo - step, u_min);
      if (residual(lo) <= 0.0) break;
      if (lo == u_min) return 0.0;  // below the smallest subnormal
      hi = lo;
      step *= 2.0;
    }
  }

  double u = 0.5 * (lo + hi);
  for (int iter = 0; iter < 300; ++iter) {
    const double r = residual(u);
    if (r == 0.0) break;
    if (r < 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    const double d = slope_du(std::exp(u));
    double next = u - r / (increasing ? d : -d);
    if (!(d > 0.0) || !(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - u) <= 4 * std::numeric_limits<double>::epsilon() *
                                     std::max(1.0, std::abs(u))) {
      u = next;
      break;
    }
    u = next;
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
      break;
    }
  }
  return std::exp(u);
}

}  // namespace

double clamp_probability(double p) {
  if (std::isnan(p)) throw DomainError("probability is NaN");
  return std::clamp(p, 0.0, 1.0);
}

double log_binomial_pmf(std::int64_t r, std::int64_t n, double rho, double q) {
  if (r < 0 || r > n) return -kInf;
  const double nd = static_cast<double>(n);
  if (rho == 0.0) return r == 0 ? 0.0 : -kInf;
  if (q == 0.0) return r == n ? 0.0 : -kInf;
  if (r == 0) {
    if (n == 0) return 0.0;
    return rho < 0.1 ? -deviance(nd, nd * q) - nd * rho : nd * std::log(q);
  }
  if (r == n) {
    return q < 0.1 ? -deviance(nd, nd * rho) - nd * q : nd * std::log(rho);
  }
  const double rd = static_cast<double>(r);
  const double log_coeff = stirling_remainder(n) - stirling_remainder(r) -
                           stirling_remainder(n - r) - deviance(rd, nd * rho) -
                           deviance(nd - rd, nd * q);
  const double log_scale = std::log(2.0 * std::numbers::pi) + std::log(rd) + std::log1p(-rd / nd);
  return log_coeff - 0.5 * log_scale;
}

double log_binomial_cdf(std::int64_t c, std::int64_t n, double rho, double q) {
  if (n < 0 || c < 0) throw DomainError("binomial_cdf: counts must be nonnegative");
  if (c > n) throw DomainError("binomial_cdf: c exceeds n");
  require_probability(rho, "rho");
  require_probability(q, "q");
  if (c == n || rho == 0.0) return 0.0;
  if (q == 0.0) return -kInf;

  // Always sum the tail that lies away from the mode, starting at its
  // largest term; terms shrink geometrically so the loop stops early.
  const auto mode = static_cast<std::int64_t>(std::floor((static_cast<double>(n) + 1.0) * rho));
  double term = 1.0;
  double sum = 1.0;
  if (c < mode) {
    const double odds = q / rho;
    for (std::int64_t r = c; r > 0; --r) {
      term *= static_cast<double>(r) / static_cast<double>(n - r + 1) * odds;
      sum += term;
      if (term < sum * 1e-18) break;
    }
    return std::min(0.0, log_binomial_pmf(c, n, rho, q) + std::log(sum));
  }
  // Complement: 1 - P[X >= c + 1].
  const double odds = rho / q;
  for (std::int64_t r = c + 1; r < n; ++r) {
    term *= static_cast<double>(n - r) / static_cast<double>(r + 1) * odds;
    sum += term;
    if (term < sum * 1e-18) break;
  }
  const double log_upper = log_binomial_pmf(c + 1, n, rho, q) + std::log(sum);
  return std::min(0.0, std::log1p(-std::min(1.0, std::exp(log_upper))));
}

double binomial_cdf(std::int64_t c, std::int64_t n, double rho, double q) {
  return clamp_probability(std::exp(log_binomial_cdf(c, n, rho, q)));
}

double binomial_cdf(std::int64_t c, std::int64_t n, double rho) {
  require_probability(rho, "rho");
  return binomial_cdf(c, n, rho, 1.0 - rho);
}

double normal_cdf(double z) {
  if (std::isnan(z)) throw DomainError("normal_cdf: z is NaN");
  return clamp_probability(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double chi_square_sf(double x, double df) {
  if (!(x >= 0.0)) throw DomainError("chi_square_sf: x must be nonnegative");
  require_positive(df, "df");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return clamp_probability(boost::math::gamma_q(0.5 * df, 0.5 * x));
}

double chi_square_cdf(double x, double df) {
  if (!(x >= 0.0)) throw DomainError("chi_square_cdf: x must be nonnegative");
  require_positive(df, "df");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return clamp_probability(boost::math::gamma_p(0.5 * df, 0.5 * x));
}

double gamma_cdf(double x, double shape, double rate) {
  require_positive(shape, "shape");
  require_positive(rate, "rate");
  if (!(x >= 0.0)) throw DomainError("gamma_cdf: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return clamp_probability(boost::math::gamma_p(shape, rate * x));
}

double gamma_sf(double x, double shape, double rate) {
  require_positive(shape, "shape");
  require_positive(rate, "rate");
  if (!(x >= 0.0)) throw DomainError("gamma_sf: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return clamp_probability(boost::math::gamma_q(shape, rate * x));
}

namespace {

double solve_gamma(double target, double shape, double rate, bool upper) {
  auto slope = [&](double x) {
    return boost::math::gamma_p_derivative(shape, rate * x) * rate * x;
  };
  const double mean = shape / rate;
  if (upper) {
    return solve_in_log_space([&](double x) { return gamma_sf(x, shape, rate); }, slope,
                              target, false, mean);
  }
  return solve_in_log_space([&](double x) { return gamma_cdf(x, shape, rate); }, slope, target,
                            true, mean);
}

}  // namespace

double gamma_quantile(double q, double shape, double rate) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("gamma_quantile: q must lie in (0, 1)");
  require_positive(shape, "shape");
  require_positive(rate, "rate");
  // Solve on whichever tail is smaller; 1 - q is exact for q >= 0.5.
  if (q > 0.5) return solve_gamma(1.0 - q, shape, rate, true);
  return solve_gamma(q, shape, rate, false);
}

double gamma_quantile_upper(double p, double shape, double rate) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gamma_quantile_upper: p must lie in (0, 1)");
  require_positive(shape, "shape");
  require_positive(rate, "rate");
  if (p > 0.5) return solve_gamma(1.0 - p, shape, rate, false);
  return solve_gamma(p, shape, rate, true);
}

}  // namespace fedsurv::numerics

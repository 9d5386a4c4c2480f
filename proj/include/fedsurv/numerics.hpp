#pragma once

// Special-function kernels used by the surge test and the p-value combiners.
//
// Every function here is pure. Probabilities returned are clamped to [0, 1].

#include <cstdint>

namespace fedsurv::numerics {

/// P[X <= c] for X ~ Bin(n, rho), with rho the per-trial success probability.
/// Throws DomainError when c > n or rho is outside [0, 1].
double binomial_cdf(std::int64_t c, std::int64_t n, double rho);

/// Same tail, parameterised by both success and failure probabilities so
/// callers that know them exactly (rho + q == 1 up to rounding) avoid the
/// cancellation in 1 - rho.
double binomial_cdf(std::int64_t c, std::int64_t n, double rho, double q);

/// log P[X <= c]. Stays finite far below the smallest representable double,
/// which the tail bounds in the surge diagnostics rely on.
double log_binomial_cdf(std::int64_t c, std::int64_t n, double rho, double q);

/// log of the binomial pmf C(n, r) rho^r q^(n-r), accurate to a few ulps
/// (saddle-point form with Stirling remainders, no factorials).
double log_binomial_pmf(std::int64_t r, std::int64_t n, double rho, double q);

double normal_cdf(double z);

/// Inverse of normal_cdf. Throws DomainError unless 0 < p < 1.
double normal_quantile(double p);

/// Survival function of the chi-square distribution (regularized upper
/// incomplete gamma Q(df/2, x/2)).
double chi_square_sf(double x, double df);
double chi_square_cdf(double x, double df);

double gamma_cdf(double x, double shape, double rate);
double gamma_sf(double x, double shape, double rate);

/// x with gamma_cdf(x, shape, rate) == q. Bracketed Newton/bisection on the
/// regularized lower incomplete gamma, in log(x) so tiny shapes converge.
/// Throws DomainError unless 0 < q < 1 and shape, rate > 0.
double gamma_quantile(double q, double shape, double rate);

/// x with gamma_sf(x, shape, rate) == p, i.e. gamma_quantile(1 - p, ...)
/// without forming 1 - p. Used by the weighted Fisher family where p is a
/// possibly tiny p-value.
double gamma_quantile_upper(double p, double shape, double rate);

/// Clamp to [0, 1]; NaN is rejected with DomainError.
double clamp_probability(double p);

}  // namespace fedsurv::numerics

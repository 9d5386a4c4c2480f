#pragma once

// Semi-synthetic data: smooth observed counts into a prevalence, resample
// Poisson observations from it, and split the result across sites with
// controlled number, magnitude and imbalance.

#include <cstdint>
#include <vector>

#include "fedsurv/series.hpp"

namespace fedsurv {

/// Site shares s_i >= 0 summing to 1 (within 1e-9).
class ShareVector {
 public:
  explicit ShareVector(std::vector<double> shares);  // throws ConfigError

  static ShareVector equal(std::size_t n_sites);
  /// One site with `largest`, the remaining n_sites - 1 splitting the rest equally.
  static ShareVector dominant(std::size_t n_sites, double largest);

  const std::vector<double>& values() const { return shares_; }
  std::size_t size() const { return shares_.size(); }
  double operator[](std::size_t i) const { return shares_[i]; }

 private:
  std::vector<double> shares_;
};

/// Centered moving average; where the centered window would run past either
/// end, the trailing window [t - window + 1, t] (truncated at 0) is used.
/// A window longer than the series is allowed and yields trailing means only.
PrevalenceSeries moving_average(const CountSeries& series, int window);

/// Pointwise rate * multiplier. Throws DomainError unless multiplier > 0.
PrevalenceSeries scale_magnitude(const PrevalenceSeries& prev, double multiplier);

/// One Poisson draw per period with mean equal to the rate.
CountSeries poisson_sample(const PrevalenceSeries& prev, std::uint64_t seed,
                           std::string site_id = "sample");

/// Distribute each period's count over the sites by a multinomial draw with
/// probabilities equal to the shares. Per-period totals are preserved exactly.
std::vector<CountSeries> split_multinomial(const CountSeries& series, const ShareVector& shares,
                                           std::uint64_t seed);

/// -sum s_i log s_i / log N. Throws DomainError for N < 2.
double normalized_entropy(const ShareVector& shares);

/// The dominant-site share vector of size n_sites whose normalized entropy
/// equals `target` (bisection on the largest share over [1/N, 1]).
ShareVector shares_for_entropy(std::size_t n_sites, double target);

/// A deterministic epidemic-shaped count series (several waves of differing
/// height and width over a low endemic level) for use when no observed data
/// is supplied. Counts are a fixed Poisson draw from the wave curve so that
/// smoothing and resampling behave as on observed data.
CountSeries builtin_observed_series(Cadence cadence = Cadence::kWeekly, std::size_t length = 156,
                                    double scale = 1.0);

}  // namespace fedsurv

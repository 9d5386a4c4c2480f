#include "fedsurv/semisynth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fedsurv/error.hpp"
#include "fedsurv/rng.hpp"

namespace fedsurv {

ShareVector::ShareVector(std::vector<double> shares) : shares_(std::move(shares)) {
  if (shares_.empty()) throw ConfigError("share vector is empty");
  double sum = 0.0;
  for (double s : shares_) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("shares must be finite and >= 0");
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("shares must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

ShareVector ShareVector::equal(std::size_t n_sites) {
  if (n_sites == 0) throw ConfigError("need at least one site");
  return ShareVector(std::vector<double>(n_sites, 1.0 / static_cast<double>(n_sites)));
}

ShareVector ShareVector::dominant(std::size_t n_sites, double largest) {
  if (n_sites == 0) throw ConfigError("need at least one site");
  if (!(largest >= 0.0 && largest <= 1.0)) throw ConfigError("largest share must lie in [0, 1]");
  if (n_sites == 1) return ShareVector({1.0});
  std::vector<double> s(n_sites, (1.0 - largest) / static_cast<double>(n_sites - 1));
  s[0] = largest;
  return ShareVector(std::move(s));
}

PrevalenceSeries moving_average(const CountSeries& series, int window) {
  if (series.size() == 0) throw DomainError("moving_average: empty series");
  if (window < 1) throw DomainError("moving_average: window must be >= 1");
  series.validate();

  const auto len = static_cast<std::ptrdiff_t>(series.size());
  const std::ptrdiff_t left = window / 2;
  const std::ptrdiff_t right = window - 1 - left;
  std::vector<double> prefix(series.size() + 1, 0.0);
  for (std::size_t i = 0; i < series.size(); ++i) {
    prefix[i + 1] = prefix[i] + static_cast<double>(series.counts[i]);
  }
  auto mean = [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {  // inclusive
    return (prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)]) /
           static_cast<double>(hi - lo + 1);
  };

  PrevalenceSeries out{series.cadence, series.timestamps, std::vector<double>(series.size())};
  for (std::ptrdiff_t t = 0; t < len; ++t) {
    if (t - left >= 0 && t + right < len) {
      out.rates[static_cast<std::size_t>(t)] = mean(t - left, t + right);
    } else {
      out.rates[static_cast<std::size_t>(t)] = mean(std::max<std::ptrdiff_t>(0, t - window + 1), t);
    }
  }
  return out;
}

PrevalenceSeries scale_magnitude(const PrevalenceSeries& prev, double multiplier) {
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) {
    throw DomainError("magnitude multiplier must be positive");
  }
  PrevalenceSeries out = prev;
  for (double& r : out.rates) r *= multiplier;
  return out;
}

CountSeries poisson_sample(const PrevalenceSeries& prev, std::uint64_t seed, std::string site_id) {
  for (double r : prev.rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("poisson_sample: negative rate");
  }
  Rng rng = make_rng(seed, {0x706f6973ULL});
  CountSeries out{std::move(site_id), prev.cadence, prev.timestamps,
                  std::vector<std::int64_t>(prev.size(), 0)};
  for (std::size_t t = 0; t < prev.size(); ++t) {
    if (prev.rates[t] > 0.0) {
      std::poisson_distribution<std::int64_t> draw(prev.rates[t]);
      out.counts[t] = draw(rng);
    }
  }
  return out;
}

std::vector<CountSeries> split_multinomial(const CountSeries& series, const ShareVector& shares,
                                           std::uint64_t seed) {
  const std::size_t n_sites = shares.size();
  std::vector<CountSeries> out(n_sites);
  for (std::size_t i = 0; i < n_sites; ++i) {
    out[i] = CountSeries{series.site_id + "-s" + std::to_string(i), series.cadence,
                         series.timestamps, std::vector<std::int64_t>(series.size(), 0)};
  }
  Rng rng = make_rng(seed, {0x73706c6974ULL});
  for (std::size_t t = 0; t < series.size(); ++t) {
    // Sequential conditional binomials: site i gets Bin(remaining, s_i / remaining share).
    std::int64_t remaining = series.counts[t];
    double remaining_share = 1.0;
    for (std::size_t i = 0; i + 1 < n_sites && remaining > 0; ++i) {
      const double prob =
          remaining_share > 0.0 ? std::clamp(shares[i] / remaining_share, 0.0, 1.0) : 0.0;
      std::int64_t k = 0;
      if (prob >= 1.0) {
        k = remaining;
      } else if (prob > 0.0) {
        std::binomial_distribution<std::int64_t> draw(remaining, prob);
        k = draw(rng);
      }
      out[i].counts[t] = k;
      remaining -= k;
      remaining_share -= shares[i];
    }
    out[n_sites - 1].counts[t] += remaining;
  }
  return out;
}

double normalized_entropy(const ShareVector& shares) {
  if (shares.size() < 2) throw DomainError("normalized entropy needs at least two sites");
  double h = 0.0;
  for (double s : shares.values()) {
    if (s > 0.0) h -= s * std::log(s);
  }
  return std::clamp(h / std::log(static_cast<double>(shares.size())), 0.0, 1.0);
}

ShareVector shares_for_entropy(std::size_t n_sites, double target) {
  if (n_sites < 2) throw DomainError("entropy target needs at least two sites");
  if (!(target >= 0.0 && target <= 1.0)) throw DomainError("entropy target must lie in [0, 1]");
  // Entropy decreases monotonically as the largest share grows from 1/N to 1.
  double lo = 1.0 / static_cast<double>(n_sites);
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normalized_entropy(ShareVector::dominant(n_sites, mid)) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return ShareVector::dominant(n_sites, 0.5 * (lo + hi));
}

CountSeries builtin_observed_series(Cadence cadence, std::size_t length, double scale) {
  if (!(scale > 0.0)) throw DomainError("scale must be positive");
  struct Wave {
    double center_week;
    double width_weeks;
    double height;
  };
  // Endemic level of 20 per week with six waves of mixed size and speed.
  constexpr double kEndemic = 20.0;
  constexpr std::array<Wave, 6> kWaves = {{
      {14.0, 3.5, 160.0},
      {40.0, 5.0, 420.0},
      {64.0, 3.0, 240.0},
      {90.0, 4.0, 900.0},
      {116.0, 6.0, 330.0},
      {142.0, 3.5, 210.0},
  }};
  const double period_weeks = cadence_days(cadence) / 7.0;
  PrevalenceSeries curve{cadence, make_timestamps(parse_date("2020-08-02"), cadence, length),
                         std::vector<double>(length)};
  for (std::size_t i = 0; i < length; ++i) {
    const double week = static_cast<double>(i) * period_weeks;
    double rate = kEndemic;
    for (const auto& w : kWaves) {
      const double d = (week - w.center_week) / w.width_weeks;
      rate += w.height * std::exp(-0.5 * d * d);
    }
    curve.rates[i] = rate * scale * period_weeks;
  }
  return poisson_sample(curve, 0x6f62736572766564ULL, "observed");
}

}  // namespace fedsurv

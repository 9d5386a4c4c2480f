#pragma once

// Alarm generation and windowed alarm matching for surge detection.

#include <cstdint>
#include <span>
#include <vector>

#include "fedsurv/series.hpp"

namespace fedsurv {

/// Sorted, unique period indices at which an alarm fired.
class AlarmSeries {
 public:
  AlarmSeries() = default;
  /// Sorts and de-duplicates.
  explicit AlarmSeries(std::vector<std::int64_t> periods);

  const std::vector<std::int64_t>& periods() const { return periods_; }
  std::size_t size() const { return periods_.size(); }
  bool empty() const { return periods_.empty(); }

 private:
  std::vector<std::int64_t> periods_;
};

/// A predicted alarm at p matches a truth alarm at t when
/// t - before <= p <= t + after.
struct MatchWindow {
  std::int64_t before = 1;
  std::int64_t after = 2;

  /// One period early to two late for weekly data; 7 and 14 days for daily.
  static MatchWindow for_cadence(Cadence c);
};

struct MatchCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  /// TP / (TP + FP); 1 when nothing was predicted.
  double precision() const;
  /// TP / (TP + FN); 1 when there is nothing to find.
  double recall() const;
};

struct PRPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  MatchCounts counts;
};

struct PRCurve {
  std::vector<PRPoint> points;  // ascending threshold
};

/// Periods (indices into p_series plus `offset`) with p < threshold.
/// NaN entries (periods with no test) never alarm.
AlarmSeries alarms_from_pvalues(std::span<const double> p_series, double threshold,
                                std::int64_t offset = 0);

/// Alarm at t >= l when rate_t / mean(rate_{t-l..t-1}) - 1 > theta. A zero
/// baseline never alarms.
AlarmSeries alarms_from_growth(const PrevalenceSeries& prev, double theta, int baseline_len);

/// Greedy one-to-one matching in ascending time: each truth alarm takes the
/// earliest still-unmatched predicted alarm inside its window.
MatchCounts match_alarms(const AlarmSeries& truth, const AlarmSeries& predicted,
                         const MatchWindow& window);

PRCurve pr_curve(std::span<const double> p_series, const AlarmSeries& truth,
                 const MatchWindow& window, std::span<const double> thresholds,
                 std::int64_t offset = 0);

/// Sum match counts of several independent replicates point by point and
/// recompute precision/recall. All curves must share the same thresholds.
PRCurve pool_curves(std::span<const PRCurve> curves);

/// Largest recall among points with precision >= 1 - fdr; 0 when none qualify.
double recall_at_fdr(const PRCurve& curve, double fdr);

/// Harmonic mean 2PR / (P + R); 0 when P = R = 0.
double f1(double precision, double recall);

/// `count` thresholds spaced evenly in log10 between lo and hi.
std::vector<double> log_thresholds(double lo, double hi, std::size_t count);

}  // namespace fedsurv

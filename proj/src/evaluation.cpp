#include "fedsurv/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "fedsurv/error.hpp"

namespace fedsurv {

AlarmSeries::AlarmSeries(std::vector<std::int64_t> periods) : periods_(std::move(periods)) {
  std::sort(periods_.begin(), periods_.end());
  periods_.erase(std::unique(periods_.begin(), periods_.end()), periods_.end());
}

MatchWindow MatchWindow::for_cadence(Cadence c) {
  return c == Cadence::kDaily ? MatchWindow{7, 14} : MatchWindow{1, 2};
}

double MatchCounts::precision() const {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double MatchCounts::recall() const {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

AlarmSeries alarms_from_pvalues(std::span<const double> p_series, double threshold,
                                std::int64_t offset) {
  std::vector<std::int64_t> out;
  for (std::size_t t = 0; t < p_series.size(); ++t) {
    if (p_series[t] < threshold) out.push_back(static_cast<std::int64_t>(t) + offset);
  }
  return AlarmSeries(std::move(out));
}

AlarmSeries alarms_from_growth(const PrevalenceSeries& prev, double theta, int baseline_len) {
  if (baseline_len < 1) throw DomainError("baseline length must be >= 1");
  std::vector<std::int64_t> out;
  const auto l = static_cast<std::size_t>(baseline_len);
  for (std::size_t t = l; t < prev.size(); ++t) {
    double base = 0.0;
    for (std::size_t j = t - l; j < t; ++j) base += prev.rates[j];
    base /= static_cast<double>(l);
    if (base <= 0.0) continue;
    // Compare against (1 + theta) * base so exact ties do not alarm.
    if (prev.rates[t] > (1.0 + theta) * base) out.push_back(static_cast<std::int64_t>(t));
  }
  return AlarmSeries(std::move(out));
}

MatchCounts match_alarms(const AlarmSeries& truth, const AlarmSeries& predicted,
                         const MatchWindow& window) {
  if (window.before < 0 || window.after < 0) throw DomainError("match window must be >= 0");
  const auto& pred = predicted.periods();
  std::vector<bool> used(pred.size(), false);
  MatchCounts counts;
  // Truth windows all have the same width, so taking the earliest free
  // prediction for each truth alarm in order yields a maximum matching.
  std::size_t first = 0;
  for (auto t : truth.periods()) {
    while (first < pred.size() && pred[first] < t - window.before) ++first;
    bool matched = false;
    for (std::size_t j = first; j < pred.size() && pred[j] <= t + window.after; ++j) {
      if (!used[j]) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (matched) {
      ++counts.tp;
    } else {
      ++counts.fn;
    }
  }
  counts.fp = static_cast<std::int64_t>(pred.size()) - counts.tp;
  return counts;
}

PRCurve pr_curve(std::span<const double> p_series, const AlarmSeries& truth,
                 const MatchWindow& window, std::span<const double> thresholds,
                 std::int64_t offset) {
  std::vector<double> sorted(thresholds.begin(), thresholds.end());
  std::sort(sorted.begin(), sorted.end());
  PRCurve curve;
  for (double th : sorted) {
    if (!(th > 0.0 && th < 1.0)) throw DomainError("thresholds must lie in (0, 1)");
    const auto counts = match_alarms(truth, alarms_from_pvalues(p_series, th, offset), window);
    curve.points.push_back({th, counts.precision(), counts.recall(), counts});
  }
  return curve;
}

PRCurve pool_curves(std::span<const PRCurve> curves) {
  if (curves.empty()) return {};
  PRCurve out = curves.front();
  for (std::size_t c = 1; c < curves.size(); ++c) {
    if (curves[c].points.size() != out.points.size()) {
      throw ConfigError("cannot pool curves with different threshold grids");
    }
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      auto& dst = out.points[i].counts;
      const auto& src = curves[c].points[i].counts;
      dst.tp += src.tp;
      dst.fp += src.fp;
      dst.fn += src.fn;
    }
  }
  for (auto& pt : out.points) {
    pt.precision = pt.counts.precision();
    pt.recall = pt.counts.recall();
  }
  return out;
}

double recall_at_fdr(const PRCurve& curve, double fdr) {
  if (curve.points.empty()) throw DomainError("recall_at_fdr: empty curve");
  double best = 0.0;
  for (const auto& pt : curve.points) {
    if (pt.precision >= 1.0 - fdr) best = std::max(best, pt.recall);
  }
  return best;
}

double f1(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<double> log_thresholds(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo && hi < 1.0) || count < 2) {
    throw DomainError("log_thresholds needs 0 < lo < hi < 1 and count >= 2");
  }
  std::vector<double> out(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

}  // namespace fedsurv

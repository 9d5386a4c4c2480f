#pragma once

// Experiment drivers shared by the CLI and the acceptance suite:
// Monte Carlo power curves with per-method calibrated rejection thresholds,
// and the semi-synthetic smooth -> sample -> split -> federate -> evaluate
// pipeline.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedsurv/combine.hpp"
#include "fedsurv/evaluation.hpp"
#include "fedsurv/semisynth.hpp"
#include "fedsurv/series.hpp"
#include "fedsurv/surge_test.hpp"

namespace fedsurv {

/// Detector identifiers beyond the combiners.
inline constexpr std::string_view kCentralized = "centralized";
inline constexpr std::string_view kLargestSite = "largest-site";

/// "centralized", "largest-site", or a combiner identifier.
void validate_detector_name(std::string_view name);

// ---------------------------------------------------------------- power ----

struct PowerCurveConfig {
  SurgeHypothesis hypothesis{0.3, 4, 0.05};
  /// Expected total count over the l + 1 period window, split by shares.
  double expected_total = 200.0;
  std::vector<double> shares{0.5, 0.5};
  std::vector<double> theta_grid;
  std::vector<std::string> methods;
  int calibration_replicates = 100000;
  int replicates = 20000;
  /// Accepted overshoot of the calibrated null rejection rate above alpha.
  double calibration_tolerance = 0.002;
  std::uint64_t seed = 1;
};

struct PowerPoint {
  std::string method;
  double theta_alt = 0.0;
  double power = 0.0;
  double threshold = 0.0;   // calibrated rejection threshold on the p-value
  double null_rate = 0.0;   // achieved rejection rate in the calibration run
};

/// Largest threshold tau with empirical P[p <= tau] <= alpha + tolerance,
/// found by bisection over the sorted null sample. Returns the threshold
/// and the achieved rate.
std::pair<double, double> calibrate_threshold(std::vector<double> null_p, double alpha,
                                              double tolerance);

/// Rows sorted by (method, theta').
std::vector<PowerPoint> power_curve(const PowerCurveConfig& cfg);

// ----------------------------------------------------------- semisynth ----

struct SemisynthSetting {
  std::string sweep;  // "sites" | "magnitude" | "entropy" | "shares"
  std::string label;
  ShareVector shares{std::vector<double>{1.0}};
  double magnitude = 1.0;
};

struct SemisynthConfig {
  SurgeHypothesis hypothesis{0.3, 4, 0.05};
  int smoother_window = 3;
  std::vector<std::string> methods;
  std::vector<SemisynthSetting> settings;
  int replicates = 10;
  std::vector<double> thresholds;  // defaults to 50 log-spaced in [1e-6, 0.5]
  double fdr = 0.1;
  std::optional<MatchWindow> window;  // defaults by cadence
  std::uint64_t seed = 42;
};

struct SemisynthRow {
  std::string sweep;
  std::string setting;
  std::string method;
  double recall_at_fdr = 0.0;
  double f1 = 0.0;                 // at threshold alpha vs growth alarms
  double f1_vs_centralized = 0.0;  // at threshold alpha vs centralized p alarms
};

/// Standard sweeps: equal shares over the given site counts, magnitude
/// multipliers at `base_sites` equal sites, and dominant-site entropy
/// targets at 5 sites.
std::vector<SemisynthSetting> site_count_sweep(std::span<const int> site_counts);
std::vector<SemisynthSetting> magnitude_sweep(std::span<const double> multipliers, int base_sites);
std::vector<SemisynthSetting> entropy_sweep(std::span<const double> targets, int n_sites);
SemisynthSetting explicit_shares_setting(std::vector<double> shares);

/// Runs every setting on the observed series (summed over its sites).
std::vector<SemisynthRow> run_semisynth(const CountSeries& observed, const SemisynthConfig& cfg);

/// Exact p-value series of one site or centralized series, NaN where the
/// baseline is incomplete.
std::vector<double> exact_p_series(const CountSeries& series, const SurgeHypothesis& hyp);

}  // namespace fedsurv

#pragma once

// In-process simulation of federated surge detection.
//
// Each SiteNode keeps its count series private and only emits PValueReport
// (per period) and CoarseReport (lagged totals per reporting cycle). The
// Aggregator sees nothing else: it combines the reports of one period with
// the configured method, using shares that are either known (simulation
// oracle), estimated from released coarse reports, or absent.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedsurv/combine.hpp"
#include "fedsurv/semisynth.hpp"
#include "fedsurv/series.hpp"
#include "fedsurv/surge_test.hpp"

namespace fedsurv {

struct PValueReport {
  std::string site_id;
  std::int64_t period = 0;
  double p = 1.0;

  bool operator==(const PValueReport&) const = default;
};

/// Total count of one site over reporting cycle `cycle`, i.e. periods
/// [cycle * len, (cycle + 1) * len - 1], released `lag` periods after the
/// cycle ends.
struct CoarseReport {
  std::string site_id;
  std::int64_t cycle = 0;
  std::int64_t total = 0;

  bool operator==(const CoarseReport&) const = default;
};

// Wire schema: {"site_id": str, "period": int, "p": float} and
// {"site_id": str, "cycle": int, "total": int}.
void to_json(nlohmann::json& j, const PValueReport& r);
void from_json(const nlohmann::json& j, PValueReport& r);
void to_json(nlohmann::json& j, const CoarseReport& r);
void from_json(const nlohmann::json& j, CoarseReport& r);

enum class ShareSource { kKnown, kEstimated, kNone };

std::string_view to_string(ShareSource s);
ShareSource parse_share_source(std::string_view s);

struct FederationConfig {
  SurgeHypothesis hypothesis{0.3, 4, 0.05};
  Method method = Method::kStouffer;
  ShareSource share_source = ShareSource::kNone;
  int reporting_cycle = 1;
  int lag = 0;
  /// Number of most recent released cycles pooled by the share estimator.
  int pooled_cycles = 1;
  PearsonTail pearson_tail = PearsonTail::kLower;

  /// Throws ConfigError when the method needs shares but none are provided,
  /// or cycle/lag values are out of range.
  void validate() const;
};

/// Period index at which coarse cycle `cycle` becomes visible.
std::int64_t release_period(std::int64_t cycle, int reporting_cycle, int lag);

class SiteNode {
 public:
  explicit SiteNode(CountSeries series);

  const std::string& site_id() const { return series_.site_id; }
  std::size_t num_periods() const { return series_.size(); }
  Cadence cadence() const { return series_.cadence; }
  const std::vector<Date>& timestamps() const { return series_.timestamps; }

  /// Exact p-value over the window of l baseline periods ending before t.
  /// nullopt (skip this period) when t < l or t is past the end.
  std::optional<PValueReport> compute_report(std::int64_t t, const SurgeHypothesis& hyp) const;

  /// Coarse reports of every complete cycle released at or before t.
  std::vector<CoarseReport> released_coarse_reports(std::int64_t t, int reporting_cycle,
                                                    int lag) const;

 private:
  CountSeries series_;
  friend class KnownShareOracle;
};

struct ShareEstimate {
  ShareVector shares;
  /// Total count n of the test window when available.
  std::optional<std::int64_t> total;
};

/// Simulation-side oracle: s_i = n_i / n with n_i the site's baseline plus
/// test total for the window ending at t. Not available to a real aggregator.
class KnownShareOracle {
 public:
  static ShareEstimate shares_at(std::span<const SiteNode> sites, std::int64_t t, int baseline_len);
};

/// s_i proportional to the site's total over its most recent released cycles
/// (cfg.pooled_cycles of them) as of period t; uniform when nothing usable is
/// released. The returned total rescales the pooled count to the l + 1
/// period test window.
ShareEstimate estimate_shares(std::span<const CoarseReport> coarse,
                              std::span<const std::string> site_ids, std::int64_t t,
                              const FederationConfig& cfg);

class Aggregator {
 public:
  explicit Aggregator(FederationConfig cfg);

  /// Combine the reports of one period, exactly one per entry of site_ids.
  /// Reports are placed in site_ids order, which `shares` must follow too.
  CombinedResult aggregate(std::span<const PValueReport> reports,
                           std::span<const std::string> site_ids,
                           const std::optional<ShareEstimate>& shares) const;

  const FederationConfig& config() const { return cfg_; }

 private:
  FederationConfig cfg_;
};

struct FederatedPeriod {
  std::int64_t period = 0;
  double p = 1.0;
  std::vector<double> shares;  // empty when share_source is none
  std::optional<std::int64_t> total;
  std::vector<PValueReport> reports;  // in site registration order
};

/// Run the protocol over every period that has a full baseline. Throws
/// ConfigError when the sites are not aligned.
std::vector<FederatedPeriod> run_federation(std::span<const SiteNode> sites,
                                            const FederationConfig& cfg);

std::vector<SiteNode> make_sites(const std::vector<CountSeries>& series);

}  // namespace fedsurv

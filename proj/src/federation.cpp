#include "fedsurv/federation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fedsurv/error.hpp"

namespace fedsurv {

void to_json(nlohmann::json& j, const PValueReport& r) {
  j = nlohmann::json{{"site_id", r.site_id}, {"period", r.period}, {"p", r.p}};
}

void from_json(const nlohmann::json& j, PValueReport& r) {
  j.at("site_id").get_to(r.site_id);
  j.at("period").get_to(r.period);
  j.at("p").get_to(r.p);
}

void to_json(nlohmann::json& j, const CoarseReport& r) {
  j = nlohmann::json{{"site_id", r.site_id}, {"cycle", r.cycle}, {"total", r.total}};
}

void from_json(const nlohmann::json& j, CoarseReport& r) {
  j.at("site_id").get_to(r.site_id);
  j.at("cycle").get_to(r.cycle);
  j.at("total").get_to(r.total);
}

std::string_view to_string(ShareSource s) {
  switch (s) {
    case ShareSource::kKnown:
      return "known";
    case ShareSource::kEstimated:
      return "estimated";
    case ShareSource::kNone:
      return "none";
  }
  return "none";
}

ShareSource parse_share_source(std::string_view s) {
  if (s == "known") return ShareSource::kKnown;
  if (s == "estimated") return ShareSource::kEstimated;
  if (s == "none") return ShareSource::kNone;
  throw ConfigError("unknown share source '" + std::string(s) + "'");
}

void FederationConfig::validate() const {
  if (requires_shares(method) && share_source == ShareSource::kNone) {
    throw ConfigError("method '" + std::string(to_string(method)) +
                      "' needs shares but share_source is none");
  }
  if (reporting_cycle < 1) throw ConfigError("reporting_cycle must be >= 1");
  if (lag < 0) throw ConfigError("lag must be >= 0");
  if (pooled_cycles < 1) throw ConfigError("pooled_cycles must be >= 1");
}

std::int64_t release_period(std::int64_t cycle, int reporting_cycle, int lag) {
  return (cycle + 1) * reporting_cycle - 1 + lag;
}

SiteNode::SiteNode(CountSeries series) : series_(std::move(series)) { series_.validate(); }

std::optional<PValueReport> SiteNode::compute_report(std::int64_t t,
                                                     const SurgeHypothesis& hyp) const {
  const std::int64_t l = hyp.baseline_len();
  if (t < l || t >= static_cast<std::int64_t>(series_.size())) return std::nullopt;
  std::int64_t c = 0;
  for (std::int64_t j = t - l; j < t; ++j) c += series_.counts[static_cast<std::size_t>(j)];
  const std::int64_t n = c + series_.counts[static_cast<std::size_t>(t)];
  return PValueReport{series_.site_id, t, exact_p_value(c, n, hyp)};
}

std::vector<CoarseReport> SiteNode::released_coarse_reports(std::int64_t t, int reporting_cycle,
                                                            int lag) const {
  std::vector<CoarseReport> out;
  const auto len = static_cast<std::int64_t>(series_.size());
  for (std::int64_t cycle = 0;; ++cycle) {
    const std::int64_t end = (cycle + 1) * reporting_cycle;  // exclusive
    if (end > len || release_period(cycle, reporting_cycle, lag) > t) break;
    std::int64_t total = 0;
    for (std::int64_t j = cycle * reporting_cycle; j < end; ++j) {
      total += series_.counts[static_cast<std::size_t>(j)];
    }
    out.push_back({series_.site_id, cycle, total});
  }
  return out;
}

ShareEstimate KnownShareOracle::shares_at(std::span<const SiteNode> sites, std::int64_t t,
                                          int baseline_len) {
  std::vector<double> totals(sites.size(), 0.0);
  std::int64_t n = 0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& counts = sites[i].series_.counts;
    std::int64_t n_i = 0;
    for (std::int64_t j = t - baseline_len; j <= t; ++j) {
      if (j >= 0 && j < static_cast<std::int64_t>(counts.size())) {
        n_i += counts[static_cast<std::size_t>(j)];
      }
    }
    totals[i] = static_cast<double>(n_i);
    n += n_i;
  }
  if (n == 0) return {ShareVector::equal(sites.size()), 0};
  for (double& s : totals) s /= static_cast<double>(n);
  return {ShareVector(std::move(totals)), n};
}

ShareEstimate estimate_shares(std::span<const CoarseReport> coarse,
                              std::span<const std::string> site_ids, std::int64_t t,
                              const FederationConfig& cfg) {
  const auto uniform = ShareEstimate{ShareVector::equal(site_ids.size()), std::nullopt};
  std::int64_t latest = -1;
  for (const auto& r : coarse) {
    if (release_period(r.cycle, cfg.reporting_cycle, cfg.lag) <= t) {
      latest = std::max(latest, r.cycle);
    }
  }
  if (latest < 0) return uniform;
  const std::int64_t first = std::max<std::int64_t>(0, latest - cfg.pooled_cycles + 1);

  std::map<std::string, std::int64_t, std::less<>> totals;
  for (const auto& r : coarse) {
    if (r.cycle >= first && r.cycle <= latest) totals[r.site_id] += r.total;
  }
  std::vector<double> shares(site_ids.size(), 0.0);
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < site_ids.size(); ++i) {
    auto it = totals.find(site_ids[i]);
    const std::int64_t v = it == totals.end() ? 0 : it->second;
    shares[i] = static_cast<double>(v);
    sum += v;
  }
  if (sum == 0) return uniform;
  for (double& s : shares) s /= static_cast<double>(sum);

  const double periods = static_cast<double>((latest - first + 1) * cfg.reporting_cycle);
  const double window = cfg.hypothesis.baseline_len() + 1.0;
  const auto total = static_cast<std::int64_t>(std::llround(static_cast<double>(sum) * window / periods));
  return {ShareVector(std::move(shares)), total > 0 ? std::optional(total) : std::nullopt};
}

Aggregator::Aggregator(FederationConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

CombinedResult Aggregator::aggregate(std::span<const PValueReport> reports,
                                     std::span<const std::string> site_ids,
                                     const std::optional<ShareEstimate>& shares) const {
  if (reports.size() != site_ids.size()) {
    throw ConfigError("expected one report per site (" + std::to_string(site_ids.size()) +
                      "), got " + std::to_string(reports.size()));
  }
  EvidenceSet ev;
  ev.p_values.resize(site_ids.size());
  std::vector<bool> seen(site_ids.size(), false);
  for (const auto& r : reports) {
    const auto it = std::find(site_ids.begin(), site_ids.end(), r.site_id);
    if (it == site_ids.end()) throw ConfigError("report from unknown site '" + r.site_id + "'");
    const auto idx = static_cast<std::size_t>(it - site_ids.begin());
    if (seen[idx]) throw ConfigError("duplicate report from site '" + r.site_id + "'");
    seen[idx] = true;
    ev.p_values[idx] = r.p;
  }

  Method method = cfg_.method;
  if (requires_shares(method)) {
    if (!shares) throw ConfigError("method needs shares but none were supplied");
    if (shares->shares.size() != site_ids.size()) throw ConfigError("share vector size mismatch");
    ev.shares = shares->shares.values();
    const bool have_total = shares->total && *shares->total > 0;
    if (have_total) ev.total_count = *shares->total;
    ev.rho = cfg_.hypothesis.rho();
    if (method == Method::kCorrectedStouffer && !have_total) {
      method = Method::kWeightedStouffer;
    }
    if (method == Method::kLancaster && !have_total) {
      // Without a count magnitude fall back to the 2N total-DF weighting.
      std::vector<double> dfs(site_ids.size());
      for (std::size_t i = 0; i < dfs.size(); ++i) {
        dfs[i] = 2.0 * (*ev.shares)[i] * static_cast<double>(dfs.size());
      }
      ev.dfs = std::move(dfs);
    }
  }
  auto result = combine(method, ev, cfg_.pearson_tail);
  result.method = cfg_.method;
  return result;
}

std::vector<SiteNode> make_sites(const std::vector<CountSeries>& series) {
  std::vector<SiteNode> out;
  out.reserve(series.size());
  for (const auto& s : series) out.emplace_back(s);
  return out;
}

std::vector<FederatedPeriod> run_federation(std::span<const SiteNode> sites,
                                            const FederationConfig& cfg) {
  if (sites.empty()) throw ConfigError("federation needs at least one site");
  const Aggregator aggregator(cfg);
  std::vector<std::string> ids;
  for (const auto& s : sites) {
    if (s.num_periods() != sites.front().num_periods() ||
        s.timestamps() != sites.front().timestamps() || s.cadence() != sites.front().cadence()) {
      throw ConfigError("site '" + s.site_id() + "' is not aligned with site '" +
                        sites.front().site_id() + "'");
    }
    if (std::find(ids.begin(), ids.end(), s.site_id()) != ids.end()) {
      throw ConfigError("duplicate site id '" + s.site_id() + "'");
    }
    ids.push_back(s.site_id());
  }

  const auto& hyp = cfg.hypothesis;
  const auto periods = static_cast<std::int64_t>(sites.front().num_periods());
  std::vector<FederatedPeriod> out;
  std::vector<PValueReport> reports;
  std::vector<CoarseReport> coarse;
  for (std::int64_t t = hyp.baseline_len(); t < periods; ++t) {
    reports.clear();
    for (const auto& s : sites) {
      if (auto r = s.compute_report(t, hyp)) reports.push_back(std::move(*r));
    }
    if (reports.size() != sites.size()) continue;

    std::optional<ShareEstimate> shares;
    if (cfg.share_source == ShareSource::kKnown) {
      shares = KnownShareOracle::shares_at(sites, t, hyp.baseline_len());
    } else if (cfg.share_source == ShareSource::kEstimated) {
      coarse.clear();
      for (const auto& s : sites) {
        auto released = s.released_coarse_reports(t, cfg.reporting_cycle, cfg.lag);
        coarse.insert(coarse.end(), released.begin(), released.end());
      }
      shares = estimate_shares(coarse, ids, t, cfg);
    }

    const auto result = aggregator.aggregate(reports, ids, shares);
    FederatedPeriod period{t, result.p, {}, std::nullopt, reports};
    if (shares) {
      period.shares = shares->shares.values();
      period.total = shares->total;
    }
    out.push_back(std::move(period));
  }
  return out;
}

}  // namespace fedsurv

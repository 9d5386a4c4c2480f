#include "fedsurv/combine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsurv/error.hpp"
#include "fedsurv/numerics.hpp"

namespace fedsurv {

namespace {

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr std::array<MethodName, 9> kMethodNames = {{
    {Method::kStouffer, "stouffer"},
    {Method::kFisher, "fisher"},
    {Method::kPearson, "pearson"},
    {Method::kTippett, "tippett"},
    {Method::kWeightedStouffer, "wstouffer"},
    {Method::kCorrectedStouffer, "cstouffer"},
    {Method::kWeightedFisher, "wfisher"},
    {Method::kGoods, "goods"},
    {Method::kLancaster, "lancaster"},
}};

double clamp_both(double p) { return std::clamp(p, kPValueFloor, 1.0 - kPValueFloor); }
double clamp_low(double p) { return std::max(p, kPValueFloor); }

double size_of(const EvidenceSet& ev) { return static_cast<double>(ev.p_values.size()); }

const std::vector<double>& shares_of(const EvidenceSet& ev, const char* method) {
  if (!ev.shares) throw ConfigError(std::string(method) + " requires site shares");
  return *ev.shares;
}

double weighted_z_sum(const EvidenceSet& ev, const std::vector<double>& shares) {
  double z = 0.0;
  for (std::size_t i = 0; i < ev.p_values.size(); ++i) {
    z += std::sqrt(shares[i]) * numerics::normal_quantile(clamp_both(ev.p_values[i]));
  }
  return z;
}

CombinedResult gamma_weighted_fisher(const EvidenceSet& ev, double shape_scale, Method tag) {
  ev.validate();
  const auto& shares = shares_of(ev, "wfisher");
  const double n_sites = size_of(ev);
  double stat = 0.0;
  for (std::size_t i = 0; i < ev.p_values.size(); ++i) {
    const double shape = shares[i] * n_sites * shape_scale;
    // A zero-share site is a zero-DF chi-square: it contributes nothing.
    if (shape <= 0.0) continue;
    stat += numerics::gamma_quantile_upper(clamp_both(ev.p_values[i]), shape, 0.5);
  }
  return {numerics::chi_square_sf(stat, 2.0 * n_sites), stat, tag};
}

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& entry : kMethodNames) {
    if (entry.method == m) return entry.name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& entry : kMethodNames) {
    if (entry.name == name) return entry.method;
  }
  throw ConfigError("unknown combination method '" + std::string(name) + "'");
}

bool requires_shares(Method m) {
  switch (m) {
    case Method::kWeightedStouffer:
    case Method::kCorrectedStouffer:
    case Method::kWeightedFisher:
    case Method::kGoods:
    case Method::kLancaster:
      return true;
    default:
      return false;
  }
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> out;
    for (const auto& entry : kMethodNames) out.push_back(entry.method);
    return out;
  }();
  return methods;
}

const std::vector<Method>& naive_methods() {
  static const std::vector<Method> methods = {Method::kStouffer, Method::kFisher,
                                              Method::kPearson, Method::kTippett};
  return methods;
}

void EvidenceSet::validate() const {
  if (p_values.empty()) throw DomainError("evidence set is empty");
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-values must lie in [0, 1]");
  }
  if (shares) {
    if (shares->size() != p_values.size()) {
      throw ConfigError("share vector length does not match the number of p-values");
    }
    double sum = 0.0;
    for (double s : *shares) {
      if (!(s >= 0.0)) throw ConfigError("shares must be nonnegative");
      sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("shares must sum to 1");
  }
  if (rho && !(*rho > 0.0 && *rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (total_count && *total_count < 0) throw ConfigError("total count must be nonnegative");
}

CombinedResult stouffer(const EvidenceSet& ev) {
  ev.validate();
  double z = 0.0;
  for (double p : ev.p_values) z += numerics::normal_quantile(clamp_both(p));
  return {numerics::normal_cdf(z / std::sqrt(size_of(ev))), z, Method::kStouffer};
}

CombinedResult fisher(const EvidenceSet& ev) {
  ev.validate();
  double stat = 0.0;
  for (double p : ev.p_values) stat -= 2.0 * std::log(clamp_low(p));
  return {numerics::chi_square_sf(stat, 2.0 * size_of(ev)), stat, Method::kFisher};
}

CombinedResult pearson(const EvidenceSet& ev, PearsonTail tail) {
  ev.validate();
  double stat = 0.0;
  for (double p : ev.p_values) stat -= 2.0 * std::log1p(-std::min(p, 1.0 - kPValueFloor));
  const double df = 2.0 * size_of(ev);
  const double p = tail == PearsonTail::kLower ? numerics::chi_square_cdf(stat, df)
                                               : numerics::chi_square_sf(stat, df);
  return {p, stat, Method::kPearson};
}

CombinedResult tippett(const EvidenceSet& ev) {
  ev.validate();
  const double smallest = *std::min_element(ev.p_values.begin(), ev.p_values.end());
  // 1 - (1 - m)^N without cancellation for small m.
  const double p = -std::expm1(size_of(ev) * std::log1p(-smallest));
  return {numerics::clamp_probability(p), smallest, Method::kTippett};
}

CombinedResult weighted_stouffer(const EvidenceSet& ev) {
  ev.validate();
  const double z = weighted_z_sum(ev, shares_of(ev, "wstouffer"));
  return {numerics::normal_cdf(z), z, Method::kWeightedStouffer};
}

CombinedResult corrected_stouffer(const EvidenceSet& ev) {
  ev.validate();
  const auto& shares = shares_of(ev, "cstouffer");
  if (!ev.total_count || *ev.total_count < 1) {
    throw ConfigError("cstouffer requires a total count n >= 1");
  }
  if (!ev.rho) throw ConfigError("cstouffer requires rho");
  const double rho = *ev.rho;
  const double n = static_cast<double>(*ev.total_count);
  const double correction = (1.0 - size_of(ev)) / (2.0 * std::sqrt(rho * (1.0 - rho) * n));
  const double z = weighted_z_sum(ev, shares) + correction;
  return {numerics::normal_cdf(z), z, Method::kCorrectedStouffer};
}

CombinedResult wfisher(const EvidenceSet& ev) {
  return gamma_weighted_fisher(ev, 1.0, Method::kWeightedFisher);
}

CombinedResult wfisher_half_shape(const EvidenceSet& ev) {
  return gamma_weighted_fisher(ev, 0.5, Method::kWeightedFisher);
}

CombinedResult goods(const EvidenceSet& ev) {
  ev.validate();
  const auto& shares = shares_of(ev, "goods");
  const double n_sites = size_of(ev);
  double stat = 0.0;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < ev.p_values.size(); ++i) {
    const double w = shares[i] * n_sites;
    weight_sum += w;
    if (w > 0.0) stat -= 2.0 * w * std::log(clamp_low(ev.p_values[i]));
  }
  return {numerics::chi_square_sf(stat, 2.0 * weight_sum), stat, Method::kGoods};
}

CombinedResult lancaster(const EvidenceSet& ev, std::span<const double> dfs) {
  ev.validate();
  if (dfs.size() != ev.p_values.size()) {
    throw ConfigError("lancaster needs one degree of freedom per site");
  }
  double stat = 0.0;
  double df_total = 0.0;
  for (std::size_t i = 0; i < dfs.size(); ++i) {
    if (!(dfs[i] >= 0.0) || !std::isfinite(dfs[i])) {
      throw ConfigError("lancaster degrees of freedom must be nonnegative");
    }
    if (dfs[i] == 0.0) continue;
    df_total += dfs[i];
    stat += numerics::gamma_quantile_upper(clamp_both(ev.p_values[i]), 0.5 * dfs[i], 0.5);
  }
  if (df_total <= 0.0) throw ConfigError("lancaster needs positive total degrees of freedom");
  return {numerics::chi_square_sf(stat, df_total), stat, Method::kLancaster};
}

CombinedResult combine(Method method, const EvidenceSet& ev, PearsonTail pearson_tail) {
  switch (method) {
    case Method::kStouffer:
      return stouffer(ev);
    case Method::kFisher:
      return fisher(ev);
    case Method::kPearson:
      return pearson(ev, pearson_tail);
    case Method::kTippett:
      return tippett(ev);
    case Method::kWeightedStouffer:
      return weighted_stouffer(ev);
    case Method::kCorrectedStouffer:
      return corrected_stouffer(ev);
    case Method::kWeightedFisher:
      return wfisher(ev);
    case Method::kGoods:
      return goods(ev);
    case Method::kLancaster: {
      if (ev.dfs) return lancaster(ev, *ev.dfs);
      const auto& shares = shares_of(ev, "lancaster");
      if (!ev.total_count) throw ConfigError("lancaster needs dfs or a total count");
      std::vector<double> dfs(shares.size());
      const double n = static_cast<double>(*ev.total_count);
      std::transform(shares.begin(), shares.end(), dfs.begin(),
                     [n](double s) { return s * n; });
      return lancaster(ev, dfs);
    }
  }
  throw ConfigError("unhandled method");
}

}  // namespace fedsurv

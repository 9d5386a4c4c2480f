#pragma once

// p-value combiners for independent site-level tests.
//
// Naive methods (stouffer, fisher, pearson, tippett) use only the p-values.
// The weighted family uses the sites' shares s_i of the total count; the
// continuity-corrected Stouffer also needs the total n and the baseline-side
// probability rho of the underlying binomial test.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedsurv {

enum class Method {
  kStouffer,
  kFisher,
  kPearson,
  kTippett,
  kWeightedStouffer,
  kCorrectedStouffer,
  kWeightedFisher,
  kGoods,
  kLancaster,
};

/// CLI/config identifiers: "stouffer", "fisher", "pearson", "tippett",
/// "wstouffer", "cstouffer", "wfisher", "goods", "lancaster".
std::string_view to_string(Method m);
Method parse_method(std::string_view name);  // throws ConfigError
bool requires_shares(Method m);
const std::vector<Method>& all_methods();
const std::vector<Method>& naive_methods();

/// Lower clamp for quantile and log transforms of p-values.
inline constexpr double kPValueFloor = 1e-15;

struct EvidenceSet {
  std::vector<double> p_values;
  std::optional<std::vector<double>> shares;
  std::optional<std::int64_t> total_count;
  std::optional<double> rho;
  /// Per-site degrees of freedom for Lancaster's method. When absent the
  /// dispatcher derives s_i * n from shares and total_count.
  std::optional<std::vector<double>> dfs;

  /// Throws DomainError/ConfigError on an empty set, p-values outside [0, 1],
  /// or a share vector that is negative, mis-sized, or does not sum to 1.
  void validate() const;
};

struct CombinedResult {
  double p = 1.0;
  double statistic = 0.0;
  Method method = Method::kStouffer;
};

/// Which tail of chi-square(2N) Pearson's statistic is referred to.
/// kLower: small p_i give a small statistic and a small combined p.
enum class PearsonTail { kLower, kUpper };

CombinedResult stouffer(const EvidenceSet& ev);
CombinedResult fisher(const EvidenceSet& ev);
CombinedResult pearson(const EvidenceSet& ev, PearsonTail tail = PearsonTail::kLower);
CombinedResult tippett(const EvidenceSet& ev);
CombinedResult weighted_stouffer(const EvidenceSet& ev);
CombinedResult corrected_stouffer(const EvidenceSet& ev);

/// Weighted Fisher: sum of Gamma(s_i N, 1/2) upper quantiles at p_i,
/// referred to chi-square(2N). The shape s_i N keeps the total degrees of
/// freedom at 2N, matching Fisher's method.
CombinedResult wfisher(const EvidenceSet& ev);

/// Same construction with the shape s_i N / 2 exactly as usually printed.
/// Its total degrees of freedom are N, so referring it to chi-square(2N) is
/// miscalibrated. Kept for comparison only.
CombinedResult wfisher_half_shape(const EvidenceSet& ev);

/// Good's weighted Fisher statistic -2 sum w_i log p_i with w_i = s_i N,
/// referred to chi-square(2 sum w_i). The chi-square null is an approximation.
CombinedResult goods(const EvidenceSet& ev);

/// Lancaster's generalisation: p_i mapped to chi-square(df_i) upper
/// quantiles, summed and referred to chi-square(sum df_i).
CombinedResult lancaster(const EvidenceSet& ev, std::span<const double> dfs);

/// Dispatch by identifier.
CombinedResult combine(Method method, const EvidenceSet& ev,
                       PearsonTail pearson_tail = PearsonTail::kLower);

}  // namespace fedsurv

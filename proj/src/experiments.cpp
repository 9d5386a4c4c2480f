#include "fedsurv/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fedsurv/error.hpp"
#include "fedsurv/federation.hpp"
#include "fedsurv/rng.hpp"

namespace fedsurv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct SiteDraw {
  std::int64_t c = 0;
  std::int64_t n = 0;
};

class DetectorBank {
 public:
  DetectorBank(const std::vector<std::string>& names, const SurgeHypothesis& hyp,
               std::size_t largest)
      : hyp_(hyp), largest_(largest) {
    for (const auto& name : names) {
      validate_detector_name(name);
      if (name == kCentralized) {
        kinds_.push_back(Kind::kCentral);
        methods_.push_back(Method::kStouffer);
      } else if (name == kLargestSite) {
        kinds_.push_back(Kind::kLargest);
        methods_.push_back(Method::kStouffer);
      } else {
        kinds_.push_back(Kind::kCombiner);
        methods_.push_back(parse_method(name));
      }
    }
  }

  std::size_t size() const { return kinds_.size(); }

  // p-value of every detector for one replicate of site draws.
  void evaluate(std::span<const SiteDraw> draws, std::vector<double>& out) const {
    out.resize(kinds_.size());
    std::int64_t c = 0;
    std::int64_t n = 0;
    EvidenceSet ev;
    ev.p_values.resize(draws.size());
    std::vector<double> shares(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
      c += draws[i].c;
      n += draws[i].n;
      ev.p_values[i] = exact_p_value(draws[i].c, draws[i].n, hyp_);
    }
    for (std::size_t i = 0; i < draws.size(); ++i) {
      shares[i] = n > 0 ? static_cast<double>(draws[i].n) / static_cast<double>(n)
                        : 1.0 / static_cast<double>(draws.size());
    }
    ev.shares = std::move(shares);
    ev.rho = hyp_.rho();
    if (n > 0) ev.total_count = n;

    for (std::size_t m = 0; m < kinds_.size(); ++m) {
      switch (kinds_[m]) {
        case Kind::kCentral:
          out[m] = exact_p_value(c, n, hyp_);
          break;
        case Kind::kLargest:
          out[m] = ev.p_values[largest_];
          break;
        case Kind::kCombiner:
          if (n == 0) {
            out[m] = 1.0;
          } else {
            out[m] = combine(methods_[m], ev).p;
          }
          break;
      }
    }
  }

 private:
  enum class Kind { kCentral, kLargest, kCombiner };
  SurgeHypothesis hyp_;
  std::size_t largest_;
  std::vector<Kind> kinds_;
  std::vector<Method> methods_;
};

void draw_sites(const PowerCurveConfig& cfg, double theta_alt, Rng& rng,
                std::vector<SiteDraw>& out) {
  const double l = cfg.hypothesis.baseline_len();
  const double q_alt = (1.0 + theta_alt) / (1.0 + theta_alt + l);
  out.resize(cfg.shares.size());
  for (std::size_t i = 0; i < cfg.shares.size(); ++i) {
    const double mean = cfg.shares[i] * cfg.expected_total;
    std::int64_t n = 0;
    if (mean > 0.0) n = std::poisson_distribution<std::int64_t>(mean)(rng);
    std::int64_t r = 0;
    if (n > 0) r = std::binomial_distribution<std::int64_t>(n, q_alt)(rng);
    out[i] = {n - r, n};
  }
}

}  // namespace

void validate_detector_name(std::string_view name) {
  if (name == kCentralized || name == kLargestSite) return;
  parse_method(name);
}

std::pair<double, double> calibrate_threshold(std::vector<double> null_p, double alpha,
                                              double tolerance) {
  if (null_p.empty()) throw DomainError("calibration needs at least one null replicate");
  std::sort(null_p.begin(), null_p.end());
  const auto total = static_cast<double>(null_p.size());
  const auto budget = static_cast<std::size_t>(std::floor((alpha + tolerance) * total));
  auto rejected = [&](double tau) {
    return static_cast<std::size_t>(std::upper_bound(null_p.begin(), null_p.end(), tau) -
                                    null_p.begin());
  };
  if (budget >= null_p.size()) return {1.0, 1.0};
  if (budget == 0) return {0.0, static_cast<double>(rejected(0.0)) / total};

  // The rejection count is a step function of tau that jumps at sample
  // values. Bisect on the sorted index for the last distinct value whose
  // count stays within budget.
  std::size_t lo = 0;
  std::size_t hi = budget;  // count(sorted[budget]) > budget always
  if (rejected(null_p[0]) > budget) return {0.0, static_cast<double>(rejected(0.0)) / total};
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (rejected(null_p[mid]) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double tau = null_p[lo];
  return {tau, static_cast<double>(rejected(tau)) / total};
}

std::vector<PowerPoint> power_curve(const PowerCurveConfig& cfg) {
  if (cfg.shares.empty()) throw ConfigError("power curve needs at least one site");
  ShareVector(cfg.shares);  // validates
  if (cfg.theta_grid.empty()) throw ConfigError("power curve needs a theta' grid");
  if (cfg.methods.empty()) throw ConfigError("power curve needs at least one method");
  if (cfg.calibration_replicates < 1 || cfg.replicates < 1) {
    throw ConfigError("replicate counts must be positive");
  }
  const auto largest = static_cast<std::size_t>(
      std::max_element(cfg.shares.begin(), cfg.shares.end()) - cfg.shares.begin());
  const DetectorBank bank(cfg.methods, cfg.hypothesis, largest);

  std::vector<SiteDraw> draws;
  std::vector<double> p;
  std::vector<std::vector<double>> null_p(bank.size());
  Rng cal_rng = make_rng(cfg.seed, {1});
  for (int r = 0; r < cfg.calibration_replicates; ++r) {
    draw_sites(cfg, cfg.hypothesis.theta(), cal_rng, draws);
    bank.evaluate(draws, p);
    for (std::size_t m = 0; m < bank.size(); ++m) null_p[m].push_back(p[m]);
  }
  std::vector<std::pair<double, double>> calibration(bank.size());
  for (std::size_t m = 0; m < bank.size(); ++m) {
    calibration[m] = calibrate_threshold(std::move(null_p[m]), cfg.hypothesis.alpha(),
                                         cfg.calibration_tolerance);
  }

  std::vector<PowerPoint> out;
  for (std::size_t g = 0; g < cfg.theta_grid.size(); ++g) {
    Rng rng = make_rng(cfg.seed, {2, g});
    std::vector<std::int64_t> rejections(bank.size(), 0);
    for (int r = 0; r < cfg.replicates; ++r) {
      draw_sites(cfg, cfg.theta_grid[g], rng, draws);
      bank.evaluate(draws, p);
      for (std::size_t m = 0; m < bank.size(); ++m) {
        if (p[m] <= calibration[m].first) ++rejections[m];
      }
    }
    for (std::size_t m = 0; m < bank.size(); ++m) {
      out.push_back({cfg.methods[m], cfg.theta_grid[g],
                     static_cast<double>(rejections[m]) / cfg.replicates, calibration[m].first,
                     calibration[m].second});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const PowerPoint& a, const PowerPoint& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.theta_alt < b.theta_alt;
  });
  return out;
}

std::vector<SemisynthSetting> site_count_sweep(std::span<const int> site_counts) {
  std::vector<SemisynthSetting> out;
  for (int n : site_counts) {
    if (n < 1) throw ConfigError("site counts must be >= 1");
    out.push_back({"sites", "sites=" + std::to_string(n),
                   ShareVector::equal(static_cast<std::size_t>(n)), 1.0});
  }
  return out;
}

std::vector<SemisynthSetting> magnitude_sweep(std::span<const double> multipliers,
                                              int base_sites) {
  std::vector<SemisynthSetting> out;
  for (double m : multipliers) {
    out.push_back({"magnitude", "magnitude=" + format_number(m),
                   ShareVector::equal(static_cast<std::size_t>(base_sites)), m});
  }
  return out;
}

std::vector<SemisynthSetting> entropy_sweep(std::span<const double> targets, int n_sites) {
  std::vector<SemisynthSetting> out;
  for (double e : targets) {
    out.push_back({"entropy", "entropy=" + format_number(e),
                   shares_for_entropy(static_cast<std::size_t>(n_sites), e), 1.0});
  }
  return out;
}

SemisynthSetting explicit_shares_setting(std::vector<double> shares) {
  std::string label = "shares=";
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (i) label += '/';
    label += format_number(shares[i]);
  }
  return {"shares", label, ShareVector(std::move(shares)), 1.0};
}

std::vector<double> exact_p_series(const CountSeries& series, const SurgeHypothesis& hyp) {
  std::vector<double> out(series.size(), kNaN);
  const auto l = static_cast<std::size_t>(hyp.baseline_len());
  std::int64_t c = 0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (t >= l) out[t] = exact_p_value(c, c + series.counts[t], hyp);
    c += series.counts[t];
    if (t >= l) c -= series.counts[t - l];
  }
  return out;
}

std::vector<SemisynthRow> run_semisynth(const CountSeries& observed, const SemisynthConfig& cfg) {
  if (cfg.methods.empty()) throw ConfigError("semisynth needs at least one method");
  for (const auto& m : cfg.methods) validate_detector_name(m);
  if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
  const auto thresholds =
      cfg.thresholds.empty() ? log_thresholds(1e-6, 0.5, 50) : cfg.thresholds;
  const auto window = cfg.window.value_or(MatchWindow::for_cadence(observed.cadence));
  const auto& hyp = cfg.hypothesis;
  const double alpha_grid[] = {hyp.alpha()};

  const PrevalenceSeries base = moving_average(observed, cfg.smoother_window);
  std::vector<SemisynthRow> rows;
  for (std::size_t s = 0; s < cfg.settings.size(); ++s) {
    const auto& setting = cfg.settings[s];
    const PrevalenceSeries prev = scale_magnitude(base, setting.magnitude);
    const AlarmSeries truth = alarms_from_growth(prev, hyp.theta(), hyp.baseline_len());
    const auto& sv = setting.shares.values();
    const auto largest =
        static_cast<std::size_t>(std::max_element(sv.begin(), sv.end()) - sv.begin());

    const std::size_t n_methods = cfg.methods.size();
    std::vector<std::vector<PRCurve>> curves(n_methods);
    std::vector<std::vector<PRCurve>> at_alpha(n_methods);
    std::vector<std::vector<PRCurve>> vs_central(n_methods);

    for (int r = 0; r < cfg.replicates; ++r) {
      const auto rep = static_cast<std::uint64_t>(r);
      const CountSeries central = poisson_sample(
          prev, derive_seed(cfg.seed, {0, std::bit_cast<std::uint64_t>(setting.magnitude), rep}),
          "central");
      const auto split = split_multinomial(central, setting.shares, derive_seed(cfg.seed, {1, s, rep}));
      const auto sites = make_sites(split);
      const auto central_p = exact_p_series(central, hyp);
      const AlarmSeries central_alarms = alarms_from_pvalues(central_p, hyp.alpha());

      for (std::size_t m = 0; m < n_methods; ++m) {
        const auto& name = cfg.methods[m];
        std::vector<double> p_series;
        if (name == kCentralized) {
          p_series = central_p;
        } else if (name == kLargestSite) {
          p_series = exact_p_series(split[largest], hyp);
        } else {
          FederationConfig fc;
          fc.hypothesis = hyp;
          fc.method = parse_method(name);
          fc.share_source = requires_shares(fc.method) ? ShareSource::kKnown : ShareSource::kNone;
          p_series.assign(central.size(), kNaN);
          for (const auto& period : run_federation(sites, fc)) {
            p_series[static_cast<std::size_t>(period.period)] = period.p;
          }
        }
        curves[m].push_back(pr_curve(p_series, truth, window, thresholds));
        at_alpha[m].push_back(pr_curve(p_series, truth, window, alpha_grid));
        vs_central[m].push_back(pr_curve(p_series, central_alarms, window, alpha_grid));
      }
    }

    for (std::size_t m = 0; m < n_methods; ++m) {
      const auto pooled = pool_curves(curves[m]);
      const auto a = pool_curves(at_alpha[m]).points.front();
      const auto v = pool_curves(vs_central[m]).points.front();
      rows.push_back({setting.sweep, setting.label, cfg.methods[m], recall_at_fdr(pooled, cfg.fdr),
                      f1(a.precision, a.recall), f1(v.precision, v.recall)});
    }
  }
  return rows;
}

}  // namespace fedsurv

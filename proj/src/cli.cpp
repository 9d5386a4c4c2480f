#include "fedsurv/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fedsurv/combine.hpp"
#include "fedsurv/error.hpp"
#include "fedsurv/evaluation.hpp"
#include "fedsurv/experiments.hpp"
#include "fedsurv/federation.hpp"
#include "fedsurv/rng.hpp"
#include "fedsurv/semisynth.hpp"
#include "fedsurv/series.hpp"
#include "fedsurv/surge_test.hpp"

namespace fedsurv::cli {

namespace {

using nlohmann::json;

// Shortest representation that round-trips.
std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

template <typename T>
T get_or(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

SurgeHypothesis hypothesis_from(const json& cfg) {
  return SurgeHypothesis(get_or(cfg, "theta", 0.3), get_or(cfg, "baseline_len", 4),
                         get_or(cfg, "alpha", 0.05));
}

// Writes to --out when given, else to the command's stdout stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open output '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(item.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      throw ConfigError(std::string("cannot parse ") + what + " value '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

// Minimal reader for headered numeric CSVs (period,p / period).
std::map<std::string, std::vector<double>> read_numeric_csv(const std::string& path,
                                                            std::vector<std::string> required) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV '" + path + "'", 1);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string h;
    while (std::getline(ss, h, ',')) {
      while (!h.empty() && (h.back() == '\r' || h.back() == ' ')) h.pop_back();
      header.push_back(h);
    }
  }
  for (const auto& r : required) {
    if (std::find(header.begin(), header.end(), r) == header.end()) {
      throw ParseError("missing column '" + r + "' in '" + path + "'", 1);
    }
  }
  std::map<std::string, std::vector<double>> cols;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    for (; std::getline(ss, cell, ','); ++i) {
      if (i >= header.size()) throw ParseError("too many fields", line_no);
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      double v = 0.0;
      if (cell == "nan" || cell == "NaN" || cell.empty()) {
        v = std::numeric_limits<double>::quiet_NaN();
      } else {
        const auto* end = cell.data() + cell.size();
        auto [ptr, ec] = std::from_chars(cell.data(), end, v);
        if (ec != std::errc() || ptr != end) {
          throw ParseError("non-numeric value '" + cell + "' in column '" + header[i] + "'",
                           line_no);
        }
      }
      cols[header[i]].push_back(v);
    }
    if (i != header.size()) throw ParseError("expected " + std::to_string(header.size()) +
                                                 " fields, found " + std::to_string(i),
                                             line_no);
  }
  return cols;
}

// ------------------------------------------------------------------ test --

struct TestArgs {
  std::string config;
  std::string input;
  std::string site;
  double theta = 0.3;
  int baseline = 4;
  double alpha = 0.05;
  std::optional<std::int64_t> period;
  std::string out;
};

int cmd_test(const TestArgs& a, std::ostream& out) {
  if (a.input.empty()) throw ConfigError("test needs an input CSV (--in or config key 'input')");
  const auto sites = read_count_csv_file(a.input);
  if (sites.empty()) throw ParseError("no data rows in '" + a.input + "'");
  CountSeries series;
  if (!a.site.empty()) {
    auto it = std::find_if(sites.begin(), sites.end(),
                           [&](const CountSeries& s) { return s.site_id == a.site; });
    if (it == sites.end()) throw ConfigError("site '" + a.site + "' not found in input");
    series = *it;
  } else {
    series = sites.size() == 1 ? sites.front() : sum_series(sites);
  }
  const SurgeHypothesis hyp(a.theta, a.baseline, a.alpha);
  const auto l = static_cast<std::int64_t>(a.baseline);
  const auto len = static_cast<std::int64_t>(series.size());
  std::int64_t first = l;
  std::int64_t last = len - 1;
  if (a.period) {
    if (*a.period < l || *a.period >= len) {
      throw ConfigError("period " + std::to_string(*a.period) + " needs " + std::to_string(l) +
                        " periods of history within a series of length " + std::to_string(len));
    }
    first = last = *a.period;
  }
  Output sink(a.out, out);
  *sink << "period,date,c,n,p\n";
  for (std::int64_t t = first; t <= last; ++t) {
    SurgeWindow w;
    for (std::int64_t j = t - l; j < t; ++j) w.baseline_counts.push_back(series.counts[static_cast<std::size_t>(j)]);
    w.test_count = series.counts[static_cast<std::size_t>(t)];
    *sink << t << ',' << format_date(series.timestamps[static_cast<std::size_t>(t)]) << ','
          << w.baseline_total() << ',' << w.total() << ',' << fmt_double(exact_p_value(w, hyp))
          << '\n';
  }
  return kExitOk;
}

// --------------------------------------------------------------- combine --

struct CombineArgs {
  std::string config;
  std::string out;
  std::string method;
  std::string p;
  std::string shares;
  std::string dfs;
  std::optional<std::int64_t> n;
  std::optional<double> rho;
  std::string pearson_tail = "lower";
};

int cmd_combine(const CombineArgs& a, std::ostream& out) {
  if (a.method.empty()) throw ConfigError("combine needs a method (--method or config key 'method')");
  if (a.p.empty()) throw ConfigError("combine needs p-values (--p or config key 'p')");
  EvidenceSet ev;
  ev.p_values = parse_list(a.p, "p");
  if (!a.shares.empty()) ev.shares = parse_list(a.shares, "share");
  if (!a.dfs.empty()) ev.dfs = parse_list(a.dfs, "df");
  ev.total_count = a.n;
  ev.rho = a.rho;
  const auto tail = a.pearson_tail == "upper" ? PearsonTail::kUpper : PearsonTail::kLower;
  const auto result = combine(parse_method(a.method), ev, tail);
  json j{{"method", std::string(to_string(result.method))},
         {"p", result.p},
         {"statistic", result.statistic}};
  Output sink(a.out, out);
  *sink << j.dump() << '\n';
  return kExitOk;
}

// ----------------------------------------------------------- power-curve --

struct ConfigArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_power_curve(const ConfigArgs& a, std::ostream& out) {
  const json cfg = load_config(a.config);
  PowerCurveConfig pc;
  pc.hypothesis = hypothesis_from(cfg);
  pc.expected_total = get_or(cfg, "expected_total", 200.0);
  if (cfg.contains("shares")) {
    pc.shares = get_or(cfg, "shares", std::vector<double>{});
  } else {
    const int sites = get_or(cfg, "sites", 2);
    pc.shares = ShareVector::equal(static_cast<std::size_t>(sites)).values();
  }
  pc.theta_grid = get_or(cfg, "theta_grid", std::vector<double>{});
  if (pc.theta_grid.empty()) {
    for (int i = 0; i <= 14; ++i) pc.theta_grid.push_back(pc.hypothesis.theta() + 0.05 * i);
  }
  pc.methods = get_or(cfg, "methods",
                      std::vector<std::string>{"centralized", "largest-site", "stouffer",
                                               "fisher", "pearson", "tippett"});
  pc.calibration_replicates = get_or(cfg, "calibration_replicates", 100000);
  pc.replicates = get_or(cfg, "replicates", 20000);
  pc.calibration_tolerance = get_or(cfg, "calibration_tolerance", 0.002);
  pc.seed = a.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 1));

  const auto rows = power_curve(pc);
  Output sink(a.out, out);
  *sink << "method,theta_alt,power,threshold,null_rate\n";
  for (const auto& r : rows) {
    *sink << r.method << ',' << fmt_double(r.theta_alt) << ',' << fmt_double(r.power) << ','
          << fmt_double(r.threshold) << ',' << fmt_double(r.null_rate) << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------- semisynth --

CountSeries observed_from(const json& cfg) {
  const std::string input = get_or(cfg, "input", std::string{});
  if (!input.empty()) {
    const auto sites = read_count_csv_file(input);
    if (sites.empty()) throw ParseError("no data rows in '" + input + "'");
    return sites.size() == 1 ? sites.front() : sum_series(sites, "observed");
  }
  const auto cadence = parse_cadence(get_or(cfg, "cadence", std::string("weekly")));
  const auto length = get_or<std::size_t>(cfg, "length", cadence == Cadence::kWeekly ? 156 : 1092);
  return builtin_observed_series(cadence, length, get_or(cfg, "scale", 1.0));
}

int default_smoother(Cadence c) { return c == Cadence::kDaily ? 7 : 3; }

std::optional<MatchWindow> window_from(const json& cfg) {
  if (!cfg.contains("window")) return std::nullopt;
  const auto& w = cfg.at("window");
  return MatchWindow{get_or<std::int64_t>(w, "before", 1), get_or<std::int64_t>(w, "after", 2)};
}

std::vector<double> thresholds_from(const json& cfg) {
  if (!cfg.contains("thresholds")) return {};
  const auto& t = cfg.at("thresholds");
  if (t.is_array()) return t.get<std::vector<double>>();
  return log_thresholds(get_or(t, "min", 1e-6), get_or(t, "max", 0.5),
                        get_or<std::size_t>(t, "count", 50));
}

int cmd_semisynth(const ConfigArgs& a, std::ostream& out) {
  const json cfg = load_config(a.config);
  const CountSeries observed = observed_from(cfg);

  SemisynthConfig sc;
  sc.hypothesis = hypothesis_from(cfg);
  sc.smoother_window = get_or(cfg, "smoother_window", default_smoother(observed.cadence));
  sc.methods = get_or(cfg, "methods",
                      std::vector<std::string>{"centralized", "largest-site", "stouffer", "fisher",
                                               "pearson", "tippett", "wstouffer", "cstouffer",
                                               "wfisher"});
  sc.replicates = get_or(cfg, "replicates", 10);
  sc.fdr = get_or(cfg, "fdr", 0.1);
  sc.thresholds = thresholds_from(cfg);
  sc.window = window_from(cfg);
  sc.seed = a.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 42));

  const json sweeps = cfg.contains("sweeps") ? cfg.at("sweeps")
                                             : json{{"sites", {1, 2, 5, 10, 20}},
                                                    {"magnitude", {0.25, 0.5, 1.0, 2.0, 4.0}},
                                                    {"entropy", {1.0, 0.9, 0.8, 0.7, 0.6, 0.5}},
                                                    {"shares", {{0.8, 0.05, 0.05, 0.05, 0.05}}}};
  auto append = [&](std::vector<SemisynthSetting> more) {
    sc.settings.insert(sc.settings.end(), more.begin(), more.end());
  };
  if (sweeps.contains("sites")) append(site_count_sweep(get_or(sweeps, "sites", std::vector<int>{})));
  if (sweeps.contains("magnitude")) {
    append(magnitude_sweep(get_or(sweeps, "magnitude", std::vector<double>{}),
                           get_or(sweeps, "magnitude_sites", 5)));
  }
  if (sweeps.contains("entropy")) {
    append(entropy_sweep(get_or(sweeps, "entropy", std::vector<double>{}),
                         get_or(sweeps, "entropy_sites", 5)));
  }
  if (sweeps.contains("shares")) {
    for (auto& s : get_or(sweeps, "shares", std::vector<std::vector<double>>{})) {
      sc.settings.push_back(explicit_shares_setting(std::move(s)));
    }
  }
  if (sc.settings.empty()) throw ConfigError("semisynth config has no sweep settings");

  const auto rows = run_semisynth(observed, sc);
  Output sink(a.out, out);
  *sink << "sweep,setting,method,recall_at_fdr,f1,f1_vs_centralized\n";
  for (const auto& r : rows) {
    *sink << r.sweep << ',' << r.setting << ',' << r.method << ',' << fmt_double(r.recall_at_fdr)
          << ',' << fmt_double(r.f1) << ',' << fmt_double(r.f1_vs_centralized) << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------ federation --

struct FederationArgs {
  ConfigArgs base;
  std::string alarms_out;
};

int cmd_federation(const FederationArgs& a, std::ostream& out) {
  const json cfg = load_config(a.base.config);
  FederationConfig fc;
  fc.hypothesis = hypothesis_from(cfg);
  fc.method = parse_method(get_or(cfg, "method", std::string("stouffer")));
  fc.share_source = parse_share_source(
      get_or(cfg, "share_source", std::string(requires_shares(fc.method) ? "known" : "none")));
  fc.reporting_cycle = get_or(cfg, "reporting_cycle", 1);
  fc.lag = get_or(cfg, "lag", 0);
  fc.pooled_cycles = get_or(cfg, "pooled_cycles", 1);
  fc.pearson_tail = get_or(cfg, "pearson_tail", std::string("lower")) == "upper"
                        ? PearsonTail::kUpper
                        : PearsonTail::kLower;
  fc.validate();
  const std::uint64_t seed = a.base.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 42));
  const double threshold = get_or(cfg, "threshold", fc.hypothesis.alpha());

  std::vector<CountSeries> site_series;
  std::optional<PrevalenceSeries> prevalence;
  const std::string input = get_or(cfg, "input", std::string{});
  if (!input.empty()) {
    site_series = read_count_csv_file(input);
    if (site_series.empty()) throw ParseError("no data rows in '" + input + "'");
  } else {
    const json syn = cfg.contains("synthetic") ? cfg.at("synthetic") : json::object();
    const CountSeries observed = observed_from(syn);
    const ShareVector shares =
        syn.contains("shares")
            ? ShareVector(get_or(syn, "shares", std::vector<double>{}))
            : ShareVector::equal(get_or<std::size_t>(syn, "sites", 5));
    prevalence = scale_magnitude(
        moving_average(observed, get_or(syn, "smoother_window", default_smoother(observed.cadence))),
        get_or(syn, "magnitude", 1.0));
    const CountSeries central = poisson_sample(*prevalence, derive_seed(seed, {0}), "central");
    site_series = split_multinomial(central, shares, derive_seed(seed, {1}));
  }

  const auto sites = make_sites(site_series);
  const auto periods = run_federation(sites, fc);
  const CountSeries central = sum_series(site_series, "central");
  const auto central_p = exact_p_series(central, fc.hypothesis);
  const auto window = window_from(cfg).value_or(MatchWindow::for_cadence(central.cadence));

  std::vector<double> p_series(central.size(), std::numeric_limits<double>::quiet_NaN());
  json period_json = json::array();
  for (const auto& pr : periods) {
    p_series[static_cast<std::size_t>(pr.period)] = pr.p;
    json entry{{"period", pr.period},
               {"date", format_date(central.timestamps[static_cast<std::size_t>(pr.period)])},
               {"p", pr.p},
               {"alarm", pr.p < threshold},
               {"reports", pr.reports}};
    if (!pr.shares.empty()) entry["shares"] = pr.shares;
    if (pr.total) entry["total"] = *pr.total;
    period_json.push_back(std::move(entry));
  }
  const AlarmSeries alarms = alarms_from_pvalues(p_series, threshold);
  const AlarmSeries central_alarms = alarms_from_pvalues(central_p, threshold);
  const auto vs_central = match_alarms(central_alarms, alarms, window);
  json summary{{"alarms", alarms.size()},
               {"centralized_alarms", central_alarms.size()},
               {"vs_centralized",
                {{"precision", vs_central.precision()},
                 {"recall", vs_central.recall()},
                 {"f1", f1(vs_central.precision(), vs_central.recall())}}}};
  if (prevalence) {
    const auto truth = alarms_from_growth(*prevalence, fc.hypothesis.theta(), fc.hypothesis.baseline_len());
    const auto vs_truth = match_alarms(truth, alarms, window);
    summary["growth_alarms"] = truth.size();
    summary["vs_growth"] = {{"precision", vs_truth.precision()},
                            {"recall", vs_truth.recall()},
                            {"f1", f1(vs_truth.precision(), vs_truth.recall())}};
  }
  json report{{"method", std::string(to_string(fc.method))},
              {"share_source", std::string(to_string(fc.share_source))},
              {"reporting_cycle", fc.reporting_cycle},
              {"lag", fc.lag},
              {"pooled_cycles", fc.pooled_cycles},
              {"threshold", threshold},
              {"sites", [&] {
                 json ids = json::array();
                 for (const auto& s : sites) ids.push_back(s.site_id());
                 return ids;
               }()},
              {"periods", std::move(period_json)},
              {"summary", std::move(summary)}};
  {
    Output sink(a.base.out, out);
    *sink << report.dump(2) << '\n';
  }
  if (!a.alarms_out.empty()) {
    Output sink(a.alarms_out, out);
    *sink << "period,date,p,alarm\n";
    for (const auto& pr : periods) {
      *sink << pr.period << ','
            << format_date(central.timestamps[static_cast<std::size_t>(pr.period)]) << ','
            << fmt_double(pr.p) << ',' << (pr.p < threshold ? 1 : 0) << '\n';
    }
  }
  return kExitOk;
}

// -------------------------------------------------------------- evaluate --

struct EvaluateArgs {
  std::string config;
  std::string pvalues;
  std::string truth;
  std::int64_t before = 1;
  std::int64_t after = 2;
  std::size_t threshold_count = 50;
  double fdr = 0.1;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.pvalues.empty() || a.truth.empty()) {
    throw ConfigError("evaluate needs --pvalues and --truth (or config keys of the same name)");
  }
  const auto pcols = read_numeric_csv(a.pvalues, {"period", "p"});
  const auto tcols = read_numeric_csv(a.truth, {"period"});
  const auto& periods = pcols.at("period");
  const auto& ps = pcols.at("p");
  std::int64_t max_period = -1;
  for (double v : periods) max_period = std::max(max_period, static_cast<std::int64_t>(v));
  std::vector<double> series(static_cast<std::size_t>(max_period + 1),
                             std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < periods.size(); ++i) {
    if (periods[i] < 0) throw ParseError("negative period", i + 2);
    series[static_cast<std::size_t>(periods[i])] = ps[i];
  }
  std::vector<std::int64_t> truth_periods;
  for (double v : tcols.at("period")) truth_periods.push_back(static_cast<std::int64_t>(v));
  const AlarmSeries truth(std::move(truth_periods));
  const auto thresholds = log_thresholds(1e-6, 0.5, a.threshold_count);
  const auto curve = pr_curve(series, truth, MatchWindow{a.before, a.after}, thresholds);

  Output sink(a.out, out);
  *sink << "threshold,precision,recall,f1\n";
  for (const auto& pt : curve.points) {
    *sink << fmt_double(pt.threshold) << ',' << fmt_double(pt.precision) << ','
          << fmt_double(pt.recall) << ',' << fmt_double(f1(pt.precision, pt.recall)) << '\n';
  }
  err << "recall_at_fdr(" << a.fdr << ")=" << fmt_double(recall_at_fdr(curve, a.fdr)) << '\n';
  return kExitOk;
}

// Config keys fill in whatever the command line left unset.
template <typename T>
void merge(const CLI::App* cmd, const char* flag, const json& cfg, const char* key, T& target) {
  if (cmd->count(flag) == 0 && cfg.contains(key)) target = get_or(cfg, key, target);
}

template <typename T>
void merge(const CLI::App* cmd, const char* flag, const json& cfg, const char* key,
           std::optional<T>& target) {
  if (cmd->count(flag) == 0 && cfg.contains(key)) target = get_or(cfg, key, T{});
}

// List-valued keys accept either a JSON array or a comma-separated string.
void merge_list(const CLI::App* cmd, const char* flag, const json& cfg, const char* key,
                std::string& target) {
  if (cmd->count(flag) != 0 || !cfg.contains(key)) return;
  const auto& v = cfg.at(key);
  if (v.is_string()) {
    target = v.get<std::string>();
    return;
  }
  std::string joined;
  for (const auto& item : get_or(cfg, key, std::vector<double>{})) {
    if (!joined.empty()) joined += ',';
    joined += fmt_double(item);
  }
  target = joined;
}

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config, "Experiment configuration (JSON)");
  cmd->add_option("--seed", args.seed, "Root seed (overrides the config)");
  cmd->add_option("--out", args.out, "Output path (default: stdout)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated surge detection: exact Poisson rate-ratio tests and p-value combination",
               "fedsurv"};
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Exact surge test on a site_id,date,count CSV");
  test->add_option("--config", test_args.config, "Defaults for the options below (JSON)");
  test->add_option("--in", test_args.input, "Input CSV");
  test->add_option("--site", test_args.site, "Restrict to one site (default: sum of all sites)");
  test->add_option("--theta", test_args.theta, "Surge threshold theta");
  test->add_option("--baseline", test_args.baseline, "Baseline length l (periods)");
  test->add_option("--alpha", test_args.alpha, "Type I error rate");
  test->add_option("--period", test_args.period, "Single period index to test");
  test->add_option("--out", test_args.out, "Output path (default: stdout)");

  CombineArgs combine_args;
  auto* comb = app.add_subcommand("combine", "Combine p-values with one method");
  comb->add_option("--config", combine_args.config, "Defaults for the options below (JSON)");
  comb->add_option("--out", combine_args.out, "Output path (default: stdout)");
  comb->add_option("--method", combine_args.method, "Combination method");
  comb->add_option("--p", combine_args.p, "Comma-separated p-values");
  comb->add_option("--shares", combine_args.shares, "Comma-separated site shares");
  comb->add_option("--dfs", combine_args.dfs, "Comma-separated Lancaster degrees of freedom");
  comb->add_option("--n", combine_args.n, "Total count n (cstouffer)");
  comb->add_option("--rho", combine_args.rho, "Baseline-side probability rho (cstouffer)");
  comb->add_option("--pearson-tail", combine_args.pearson_tail, "lower|upper")
      ->check(CLI::IsMember({"lower", "upper"}));

  ConfigArgs power_args;
  auto* power = app.add_subcommand("power-curve", "Monte Carlo power curves with calibrated thresholds");
  add_config_options(power, power_args);

  ConfigArgs semi_args;
  auto* semi = app.add_subcommand("semisynth", "Semi-synthetic sweeps over sites, magnitude and imbalance");
  add_config_options(semi, semi_args);

  FederationArgs fed_args;
  auto* fed = app.add_subcommand("federation", "Run the federated protocol and report alarms");
  add_config_options(fed, fed_args.base);
  fed->add_option("--alarms-out", fed_args.alarms_out, "Alarm CSV output path");

  EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "Precision/recall of a p-value series against truth alarms");
  eval->add_option("--config", eval_args.config, "Defaults for the options below (JSON)");
  eval->add_option("--pvalues", eval_args.pvalues, "CSV with period,p columns");
  eval->add_option("--truth", eval_args.truth, "CSV with a period column");
  eval->add_option("--before", eval_args.before, "Match window periods before a truth alarm");
  eval->add_option("--after", eval_args.after, "Match window periods after a truth alarm");
  eval->add_option("--thresholds", eval_args.threshold_count, "Number of log-spaced thresholds");
  eval->add_option("--fdr", eval_args.fdr, "False discovery rate for recall@FDR");
  eval->add_option("--out", eval_args.out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*test) {
      const json cfg = load_config(test_args.config);
      merge(test, "--in", cfg, "input", test_args.input);
      merge(test, "--site", cfg, "site", test_args.site);
      merge(test, "--theta", cfg, "theta", test_args.theta);
      merge(test, "--baseline", cfg, "baseline_len", test_args.baseline);
      merge(test, "--alpha", cfg, "alpha", test_args.alpha);
      merge(test, "--period", cfg, "period", test_args.period);
      merge(test, "--out", cfg, "out", test_args.out);
      return cmd_test(test_args, out);
    }
    if (*comb) {
      const json cfg = load_config(combine_args.config);
      merge(comb, "--method", cfg, "method", combine_args.method);
      merge_list(comb, "--p", cfg, "p", combine_args.p);
      merge_list(comb, "--shares", cfg, "shares", combine_args.shares);
      merge_list(comb, "--dfs", cfg, "dfs", combine_args.dfs);
      merge(comb, "--n", cfg, "n", combine_args.n);
      merge(comb, "--rho", cfg, "rho", combine_args.rho);
      merge(comb, "--pearson-tail", cfg, "pearson_tail", combine_args.pearson_tail);
      return cmd_combine(combine_args, out);
    }
    if (*eval) {
      const json cfg = load_config(eval_args.config);
      merge(eval, "--pvalues", cfg, "pvalues", eval_args.pvalues);
      merge(eval, "--truth", cfg, "truth", eval_args.truth);
      merge(eval, "--before", cfg, "before", eval_args.before);
      merge(eval, "--after", cfg, "after", eval_args.after);
      merge(eval, "--thresholds", cfg, "thresholds", eval_args.threshold_count);
      merge(eval, "--fdr", cfg, "fdr", eval_args.fdr);
      return cmd_evaluate(eval_args, out, err);
    }
    if (*comb) return cmd_combine(combine_args, out);
    if (*power) return cmd_power_curve(power_args, out);
    if (*semi) return cmd_semisynth(semi_args, out);
    if (*fed) return cmd_federation(fed_args, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fedsurv::cli

#include "fedsurv/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fedsurv/error.hpp"

namespace fedsurv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

void check_timestamps(const std::vector<Date>& ts, Cadence cadence) {
  const auto step = std::chrono::days(cadence_days(cadence));
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i] - ts[i - 1] != step) {
      throw DomainError("timestamps are not equally spaced at the " +
                        std::string(to_string(cadence)) + " cadence (at " +
                        format_date(ts[i]) + ")");
    }
  }
}

}  // namespace

std::string_view to_string(Cadence c) { return c == Cadence::kDaily ? "daily" : "weekly"; }

Cadence parse_cadence(std::string_view s) {
  if (s == "daily") return Cadence::kDaily;
  if (s == "weekly") return Cadence::kWeekly;
  throw ConfigError("unknown cadence '" + std::string(s) + "'");
}

int cadence_days(Cadence c) { return c == Cadence::kDaily ? 1 : 7; }

Date parse_date(std::string_view s) {
  s = trim(s);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_number(s.substr(0, 4), y) ||
      !parse_number(s.substr(5, 2), m) || !parse_number(s.substr(8, 2), d)) {
    throw ParseError("invalid date '" + std::string(s) + "', expected YYYY-MM-DD");
  }
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(m),
                                        std::chrono::day(d)};
  if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(s) + "'");
  return Date(ymd);
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd(d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::vector<Date> make_timestamps(Date start, Cadence cadence, std::size_t count) {
  std::vector<Date> out(count);
  const auto step = std::chrono::days(cadence_days(cadence));
  for (std::size_t i = 0; i < count; ++i) out[i] = start + step * static_cast<int>(i);
  return out;
}

void CountSeries::validate() const {
  if (timestamps.size() != counts.size()) throw DomainError("timestamps and counts differ in length");
  for (auto k : counts) {
    if (k < 0) throw DomainError("counts must be nonnegative");
  }
  check_timestamps(timestamps, cadence);
}

void PrevalenceSeries::validate() const {
  if (timestamps.size() != rates.size()) throw DomainError("timestamps and rates differ in length");
  for (double r : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("rates must be finite and >= 0");
  }
  check_timestamps(timestamps, cadence);
}

CountSeries sum_series(const std::vector<CountSeries>& sites, std::string site_id) {
  if (sites.empty()) throw ConfigError("no series to sum");
  CountSeries out{std::move(site_id), sites.front().cadence, sites.front().timestamps,
                  std::vector<std::int64_t>(sites.front().size(), 0)};
  for (const auto& s : sites) {
    if (s.timestamps != out.timestamps || s.cadence != out.cadence) {
      throw ConfigError("site '" + s.site_id + "' is not aligned with the other sites");
    }
    for (std::size_t t = 0; t < s.size(); ++t) out.counts[t] += s.counts[t];
  }
  return out;
}

std::vector<CountSeries> read_count_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty CSV, expected header site_id,date,count", 1);
  ++line_no;
  const auto header = split_fields(line);
  int col_site = -1;
  int col_date = -1;
  int col_count = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "site_id") col_site = static_cast<int>(i);
    if (header[i] == "date") col_date = static_cast<int>(i);
    if (header[i] == "count") col_count = static_cast<int>(i);
  }
  for (auto [col, name] : {std::pair{col_site, "site_id"}, std::pair{col_date, "date"},
                           std::pair{col_count, "count"}}) {
    if (col < 0) throw ParseError(std::string("missing column '") + name + "'", 1);
  }
  const auto width = header.size();

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<Date, std::int64_t>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    std::string site(fields[static_cast<std::size_t>(col_site)]);
    if (site.empty()) throw ParseError("empty site_id", line_no);
    Date date;
    try {
      date = parse_date(fields[static_cast<std::size_t>(col_date)]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    std::int64_t count = 0;
    if (!parse_number(fields[static_cast<std::size_t>(col_count)], count) || count < 0) {
      throw ParseError("count must be a nonnegative integer, got '" +
                           std::string(fields[static_cast<std::size_t>(col_count)]) + "'",
                       line_no);
    }
    auto [it, inserted] = rows.try_emplace(site);
    if (inserted) order.push_back(site);
    it->second.emplace_back(date, count);
  }

  std::vector<CountSeries> out;
  for (const auto& site : order) {
    auto& entries = rows[site];
    std::sort(entries.begin(), entries.end());
    CountSeries s;
    s.site_id = site;
    for (auto& [d, k] : entries) {
      if (!s.timestamps.empty() && s.timestamps.back() == d) {
        throw ParseError("duplicate date " + format_date(d) + " for site '" + site + "'");
      }
      s.timestamps.push_back(d);
      s.counts.push_back(k);
    }
    s.cadence = Cadence::kDaily;
    if (s.size() >= 2) {
      const auto gap = (s.timestamps[1] - s.timestamps[0]).count();
      if (gap == 7) {
        s.cadence = Cadence::kWeekly;
      } else if (gap != 1) {
        throw ParseError("site '" + site + "': spacing of " + std::to_string(gap) +
                         " days is neither daily nor weekly");
      }
    }
    try {
      s.validate();
    } catch (const DomainError& e) {
      throw ParseError("site '" + site + "': " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<CountSeries> read_count_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_count_csv(in);
}

void write_count_csv(std::ostream& out, const std::vector<CountSeries>& sites) {
  out << "site_id,date,count\n";
  for (const auto& s : sites) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      out << s.site_id << ',' << format_date(s.timestamps[t]) << ',' << s.counts[t] << '\n';
    }
  }
}

}  // namespace fedsurv

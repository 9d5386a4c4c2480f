#pragma once

// Timestamped count and rate series plus the site_id,date,count CSV schema.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fedsurv {

using Date = std::chrono::sys_days;

enum class Cadence { kDaily, kWeekly };

std::string_view to_string(Cadence c);
Cadence parse_cadence(std::string_view s);  // "daily" | "weekly"
int cadence_days(Cadence c);

/// Parse YYYY-MM-DD. Throws ParseError.
Date parse_date(std::string_view s);
std::string format_date(Date d);

/// `count` consecutive timestamps starting at `start` at the given cadence.
std::vector<Date> make_timestamps(Date start, Cadence cadence, std::size_t count);

struct CountSeries {
  std::string site_id;
  Cadence cadence = Cadence::kWeekly;
  std::vector<Date> timestamps;
  std::vector<std::int64_t> counts;

  std::size_t size() const { return counts.size(); }
  /// Throws DomainError if lengths differ, counts are negative, or the
  /// timestamps are not strictly increasing at the cadence step.
  void validate() const;
};

struct PrevalenceSeries {
  Cadence cadence = Cadence::kWeekly;
  std::vector<Date> timestamps;
  std::vector<double> rates;

  std::size_t size() const { return rates.size(); }
  void validate() const;
};

/// Timestamp-wise sum of aligned series (the centralized view).
CountSeries sum_series(const std::vector<CountSeries>& sites, std::string site_id = "total");

/// Read `site_id,date,count` CSV (header required, columns in any order).
/// Sites are returned in order of first appearance; cadence is inferred
/// from the spacing (1 or 7 days) and validated. Throws ParseError with the
/// offending line number, or naming a missing column.
std::vector<CountSeries> read_count_csv(std::istream& in);
std::vector<CountSeries> read_count_csv_file(const std::string& path);

void write_count_csv(std::ostream& out, const std::vector<CountSeries>& sites);

}  // namespace fedsurv

// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace homedet {

using UnixSeconds = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;

// days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm; valid far beyond any CDR study window)
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

bool is_valid_civil(int year, unsigned month, unsigned day);
unsigned days_in_month(int year, unsigned month);

// strict "YYYY-MM-DDTHH:MM:SSZ"; returns nullopt on any deviation
std::optional<UnixSeconds> parse_iso8601_utc(std::string_view s);
std::string format_iso8601_utc(UnixSeconds ts);

// "YYYY-MM-DD" -> days since epoch
std::optional<std::int64_t> parse_date(std::string_view s);
std::string format_date(std::int64_t days);

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a % b < 0) != (b < 0))) ? q - 1 : q;
}

// Half-open UTC interval with a human label ("2007-06"). Records exactly on
// `start` belong to the period, records on `end` do not.
struct Period {
  std::string label;
  UnixSeconds start = 0;
  UnixSeconds end = 0;
};

// Validates ordering/overlap; throws Error(data) on violations.
void validate_periods(const std::vector<Period>& periods);

// Calendar-month periods between two year-months inclusive. Boundaries are
// local midnights under the fixed UTC offset, so a period's local calendar
// dates are exactly the dates of that month.
std::vector<Period> month_periods(int year0, unsigned month0, int year1, unsigned month1,
                                  double tz_offset_hours);

// "2007-05:2007-10" (inclusive) or a single "2007-05"
std::vector<Period> parse_month_range(std::string_view spec, double tz_offset_hours);

// Half-open daily time window in minutes since local midnight; wraps over
// midnight when start > end (the default 19:00-09:00 does).
struct NightWindow {
  int start_min = 19 * 60;
  int end_min = 9 * 60;

  bool contains(int minute_of_day) const {
    if (start_min <= end_min) return minute_of_day >= start_min && minute_of_day < end_min;
    return minute_of_day >= start_min || minute_of_day < end_min;
  }
};

// "19:00-09:00"; throws Error(usage) on malformed input
NightWindow parse_window(std::string_view s);
std::string format_window(const NightWindow& w);

// "+02:00" / "-03:30"; fractional-hour offsets round to the minute
std::string format_tz(double tz_offset_hours);

struct LocalTime {
  std::int64_t date_days;  // local calendar date, days since epoch
  int minute_of_day;       // 0..1439
};

inline LocalTime local_time(UnixSeconds ts, std::int64_t tz_offset_seconds) {
  const std::int64_t local = ts + tz_offset_seconds;
  const std::int64_t days = floor_div(local, kSecondsPerDay);
  const int secs = static_cast<int>(local - days * kSecondsPerDay);
  return LocalTime{days, secs / 60};
}

inline std::int64_t tz_offset_seconds(double tz_offset_hours) {
  return static_cast<std::int64_t>(tz_offset_hours * 3600.0 + (tz_offset_hours >= 0 ? 0.5 : -0.5));
}

}  // namespace homedet

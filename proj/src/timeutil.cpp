// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/timeutil.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "homedet/error.hpp"

namespace homedet {

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);                  // [0, 399]
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;        // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;                 // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = doy - (153 * mp + 2) / 5 + 1;
  month = mp + (mp < 10 ? 3 : -9);
  year = static_cast<int>(y + (month <= 2));
}

unsigned days_in_month(int year, unsigned month) {
  static constexpr std::array<unsigned, 12> lengths = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[month - 1];
}

bool is_valid_civil(int year, unsigned month, unsigned day) {
  return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

namespace {

bool parse_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<UnixSeconds> parse_iso8601_utc(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SSZ, exactly 20 chars
  if (s.size() != 20) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
    return std::nullopt;
  int y, mo, d, h, mi, sec;
  if (!parse_digits(s, 0, 4, y) || !parse_digits(s, 5, 2, mo) || !parse_digits(s, 8, 2, d) ||
      !parse_digits(s, 11, 2, h) || !parse_digits(s, 14, 2, mi) || !parse_digits(s, 17, 2, sec))
    return std::nullopt;
  if (!is_valid_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d))) return std::nullopt;
  if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
  return days_from_civil(y, mo, d) * kSecondsPerDay + h * 3600 + mi * 60 + sec;
}

std::string format_iso8601_utc(UnixSeconds ts) {
  const std::int64_t days = floor_div(ts, kSecondsPerDay);
  const int secs = static_cast<int>(ts - days * kSecondsPerDay);
  int y;
  unsigned mo, d;
  civil_from_days(days, y, mo, d);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", y, mo, d, secs / 3600,
                (secs / 60) % 60, secs % 60);
  return buf;
}

std::optional<std::int64_t> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y, mo, d;
  if (!parse_digits(s, 0, 4, y) || !parse_digits(s, 5, 2, mo) || !parse_digits(s, 8, 2, d))
    return std::nullopt;
  if (!is_valid_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d))) return std::nullopt;
  return days_from_civil(y, mo, d);
}

std::string format_date(std::int64_t days) {
  int y;
  unsigned mo, d;
  civil_from_days(days, y, mo, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, mo, d);
  return buf;
}

void validate_periods(const std::vector<Period>& periods) {
  if (periods.empty()) throw_data("no periods configured");
  for (std::size_t i = 0; i < periods.size(); ++i) {
    const Period& p = periods[i];
    if (p.start >= p.end) throw_data("period '" + p.label + "' has start >= end");
    for (std::size_t j = i + 1; j < periods.size(); ++j) {
      const Period& q = periods[j];
      if (p.start < q.end && q.start < p.end)
        throw_data("periods '" + p.label + "' and '" + q.label + "' overlap");
    }
  }
}

std::vector<Period> month_periods(int year0, unsigned month0, int year1, unsigned month1,
                                  double tz_offset_hours) {
  if (year0 > year1 || (year0 == year1 && month0 > month1)) throw_data("month range is reversed");
  const std::int64_t tz = tz_offset_seconds(tz_offset_hours);
  std::vector<Period> out;
  int y = year0;
  unsigned m = month0;
  while (y < year1 || (y == year1 && m <= month1)) {
    int ny = y;
    unsigned nm = m + 1;
    if (nm > 12) {
      nm = 1;
      ++ny;
    }
    char label[16];
    std::snprintf(label, sizeof label, "%04d-%02u", y, m);
    out.push_back(Period{label, days_from_civil(y, m, 1) * kSecondsPerDay - tz,
                         days_from_civil(ny, nm, 1) * kSecondsPerDay - tz});
    y = ny;
    m = nm;
  }
  return out;
}

namespace {

bool parse_year_month(std::string_view s, int& y, unsigned& m) {
  if (s.size() != 7 || s[4] != '-') return false;
  int yy, mm;
  if (!parse_digits(s, 0, 4, yy) || !parse_digits(s, 5, 2, mm)) return false;
  if (mm < 1 || mm > 12) return false;
  y = yy;
  m = static_cast<unsigned>(mm);
  return true;
}

}  // namespace

std::vector<Period> parse_month_range(std::string_view spec, double tz_offset_hours) {
  int y0, y1;
  unsigned m0, m1;
  const std::size_t colon = spec.find(':');
  if (colon == std::string_view::npos) {
    if (!parse_year_month(spec, y0, m0))
      throw_usage("bad month spec '" + std::string(spec) + "', expected YYYY-MM or YYYY-MM:YYYY-MM");
    return month_periods(y0, m0, y0, m0, tz_offset_hours);
  }
  if (!parse_year_month(spec.substr(0, colon), y0, m0) ||
      !parse_year_month(spec.substr(colon + 1), y1, m1))
    throw_usage("bad month range '" + std::string(spec) + "', expected YYYY-MM:YYYY-MM");
  return month_periods(y0, m0, y1, m1, tz_offset_hours);
}

NightWindow parse_window(std::string_view s) {
  // HH:MM-HH:MM
  auto bad = [&]() -> NightWindow {
    throw_usage("bad window '" + std::string(s) + "', expected HH:MM-HH:MM");
  };
  if (s.size() != 11 || s[2] != ':' || s[5] != '-' || s[8] != ':') return bad();
  int h0, m0, h1, m1;
  if (!parse_digits(s, 0, 2, h0) || !parse_digits(s, 3, 2, m0) || !parse_digits(s, 6, 2, h1) ||
      !parse_digits(s, 9, 2, m1))
    return bad();
  if (h0 > 23 || m0 > 59 || h1 > 23 || m1 > 59) return bad();
  return NightWindow{h0 * 60 + m0, h1 * 60 + m1};
}

std::string format_window(const NightWindow& w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d-%02d:%02d", w.start_min / 60, w.start_min % 60,
                w.end_min / 60, w.end_min % 60);
  return buf;
}

std::string format_tz(double tz_offset_hours) {
  std::int64_t minutes = tz_offset_seconds(tz_offset_hours) / 60;
  const char sign = minutes < 0 ? '-' : '+';
  if (minutes < 0) minutes = -minutes;
  char buf[12];
  std::snprintf(buf, sizeof buf, "%c%02d:%02d", sign, static_cast<int>(minutes / 60),
                static_cast<int>(minutes % 60));
  return buf;
}

}  // namespace homedet

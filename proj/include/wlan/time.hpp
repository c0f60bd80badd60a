#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wlan {

/// UTC instant with second resolution.
struct Timestamp {
  std::int64_t seconds = 0;  // since 1970-01-01T00:00:00Z

  auto operator<=>(const Timestamp&) const = default;

  Timestamp operator+(std::int64_t s) const { return {seconds + s}; }
  Timestamp operator-(std::int64_t s) const { return {seconds - s}; }
};

/// Calendar date, stored as days since the Unix epoch.
struct Date {
  std::int32_t days = 0;

  auto operator<=>(const Date&) const = default;

  static Date from_ymd(int y, unsigned m, unsigned d);
  Date operator+(int n) const { return {days + n}; }
  int operator-(Date other) const { return days - other.days; }

  /// 0 = Monday ... 6 = Sunday.
  int weekday_index() const;
  bool is_weekend() const { return weekday_index() >= 5; }

  std::string iso() const;  // YYYY-MM-DD
  static std::optional<Date> parse(std::string_view iso);
};

/// Fixed UTC offset used for local-time semantics (hour of day, calendar day).
struct LocalZone {
  int offset_minutes = -5 * 60;

  Date local_date(Timestamp ts) const;
  /// Seconds since local midnight, in [0, 86400).
  int local_second_of_day(Timestamp ts) const;
  int local_hour(Timestamp ts) const { return local_second_of_day(ts) / 3600; }
  /// UTC instant of local midnight starting `d`.
  Timestamp local_midnight(Date d) const;
};

/// Parses RFC3339 (`YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH:MM)`, `T` may be a space);
/// fractional seconds truncate.
std::optional<Timestamp> parse_rfc3339(std::string_view text);
/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_rfc3339(Timestamp ts);

}  // namespace wlan

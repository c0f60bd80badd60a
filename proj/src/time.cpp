#include "wlan/time.hpp"

#include <charconv>
#include <cstdio>

namespace wlan {

namespace chr = std::chrono;

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return res.ec == std::errc{};
}

}  // namespace

Date Date::from_ymd(int y, unsigned m, unsigned d) {
  chr::sys_days sd{chr::year{y} / chr::month{m} / chr::day{d}};
  return {static_cast<std::int32_t>(sd.time_since_epoch().count())};
}

int Date::weekday_index() const {
  chr::weekday wd{chr::sys_days{chr::days{days}}};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

std::string Date::iso() const {
  chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<Date> Date::parse(std::string_view iso) {
  int y = 0, m = 0, d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  if (!read_int(iso, 0, 4, y) || !read_int(iso, 5, 2, m) || !read_int(iso, 8, 2, d)) {
    return std::nullopt;
  }
  chr::year_month_day ymd{chr::year{y} / chr::month{static_cast<unsigned>(m)} /
                          chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count())};
}

Date LocalZone::local_date(Timestamp ts) const {
  return {static_cast<std::int32_t>(
      floor_div(ts.seconds + offset_minutes * 60LL, kSecondsPerDay))};
}

int LocalZone::local_second_of_day(Timestamp ts) const {
  std::int64_t local = ts.seconds + offset_minutes * 60LL;
  return static_cast<int>(local - floor_div(local, kSecondsPerDay) * kSecondsPerDay);
}

Timestamp LocalZone::local_midnight(Date d) const {
  return {d.days * kSecondsPerDay - offset_minutes * 60LL};
}

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  if (s.size() < 20) return std::nullopt;
  auto date = Date::parse(s.substr(0, 10));
  if (!date || (s[10] != 'T' && s[10] != 't' && s[10] != ' ')) return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!read_int(s, 11, 2, hh) || s[13] != ':' || !read_int(s, 14, 2, mm) || s[16] != ':' ||
      !read_int(s, 17, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;
  int offset = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh = 0, om = 0;
    if (!read_int(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !read_int(s, pos + 4, 2, om)) {
      return std::nullopt;
    }
    offset = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  std::int64_t secs = date->days * kSecondsPerDay + hh * 3600LL + mm * 60LL + ss;
  return Timestamp{secs - offset * 60LL};
}

std::string format_rfc3339(Timestamp ts) {
  std::int64_t day = floor_div(ts.seconds, kSecondsPerDay);
  auto sod = static_cast<int>(ts.seconds - day * kSecondsPerDay);
  Date d{static_cast<std::int32_t>(day)};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", d.iso().c_str(), sod / 3600,
                (sod / 60) % 60, sod % 60);
  return buf;
}

}  // namespace wlan

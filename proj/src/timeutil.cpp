#include "rdcost/timeutil.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace rdcost {
namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && p == s.data() + pos + len;
}

}  // namespace

std::optional<Date> parse_date(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!read_int(s, 0, 4, y) || !read_int(s, 5, 2, m) || !read_int(s, 8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<int> parse_utc_offset(std::string_view s) {
  if (s == "Z" || s == "UTC" || s == "utc") return 0;
  if (s.size() < 3 || (s[0] != '+' && s[0] != '-')) return std::nullopt;
  const int sign = s[0] == '-' ? -1 : 1;
  int hh = 0, mm = 0;
  if (!read_int(s, 1, 2, hh)) return std::nullopt;
  if (s.size() == 6 && s[3] == ':') {
    if (!read_int(s, 4, 2, mm)) return std::nullopt;
  } else if (s.size() == 5) {
    if (!read_int(s, 3, 2, mm)) return std::nullopt;
  } else if (s.size() != 3) {
    return std::nullopt;
  }
  // hour-resolution grid: only whole-hour offsets are representable
  if (mm != 0 || hh > 14) return std::nullopt;
  return sign * hh * 60;
}

std::optional<Hour> parse_timestamp(std::string_view s, int default_offset_minutes) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() < 13) return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  if (!date || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
  int hh = 0;
  if (!read_int(s, 11, 2, hh) || hh > 23) return std::nullopt;
  std::size_t pos = 13;
  int mm = 0, ss = 0;
  if (pos < s.size() && s[pos] == ':') {
    if (!read_int(s, pos + 1, 2, mm)) return std::nullopt;
    pos += 3;
    if (pos < s.size() && s[pos] == ':') {
      if (!read_int(s, pos + 1, 2, ss)) return std::nullopt;
      pos += 3;
    }
  }
  if (mm != 0 || ss != 0) return std::nullopt;
  int offset = default_offset_minutes;
  if (pos < s.size()) {
    auto o = parse_utc_offset(s.substr(pos));
    if (!o) return std::nullopt;
    offset = *o;
  }
  return static_cast<Hour>(date->time_since_epoch().count()) * 24 + hh - offset / 60;
}

std::string format_timestamp(Hour h) {
  const Date d = local_date(h, 0);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:00:00Z", format_date(d).c_str(), local_hour_of_day(h, 0));
  return buf;
}

}  // namespace rdcost

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rdcost {

/// Hours since 1970-01-01T00:00Z. All instants are stored in UTC at hour
/// resolution.
using Hour = std::int64_t;
using Date = std::chrono::sys_days;

/// Inclusive range of calendar dates.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const { return first <= d && d <= last; }
  bool empty() const { return last < first; }
  std::int64_t days() const { return empty() ? 0 : (last - first).count() + 1; }
  bool intersects(const DateRange& o) const { return !(o.last < first || last < o.first); }

  friend bool operator==(const DateRange&, const DateRange&) = default;
};

/// Parses an ISO-8601 instant ("2019-01-01T05:00:00Z", "2019-01-01 05:00",
/// "2019-01-01T06:00:00+01:00"). Timestamps without an explicit offset are
/// read in `default_offset_minutes`. Returns nullopt on malformed input or a
/// non-zero minute/second field.
std::optional<Hour> parse_timestamp(std::string_view text, int default_offset_minutes = 0);

/// Canonical form "YYYY-MM-DDTHH:00:00Z".
std::string format_timestamp(Hour h);

std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

/// Parses "+01:00", "-0530", "UTC", "Z" into minutes east of UTC.
std::optional<int> parse_utc_offset(std::string_view text);

inline Hour first_hour_of(Date d, int offset_minutes = 0) {
  // local midnight expressed in UTC; offsets are whole hours in practice
  return static_cast<Hour>(d.time_since_epoch().count()) * 24 - offset_minutes / 60;
}

inline Date local_date(Hour h, int offset_minutes = 0) {
  const std::int64_t local = h + offset_minutes / 60;
  std::int64_t day = local / 24;
  if (local % 24 < 0) --day;
  return Date{std::chrono::days{day}};
}

inline int local_hour_of_day(Hour h, int offset_minutes = 0) {
  const std::int64_t local = h + offset_minutes / 60;
  const std::int64_t r = local % 24;
  return static_cast<int>(r < 0 ? r + 24 : r);
}

inline unsigned month_of(Date d) { return static_cast<unsigned>(std::chrono::year_month_day{d}.month()); }
inline int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

/// 0 = Monday ... 6 = Sunday.
inline unsigned iso_weekday_index(Date d) { return std::chrono::weekday{d}.iso_encoding() - 1; }

inline Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

}  // namespace rdcost

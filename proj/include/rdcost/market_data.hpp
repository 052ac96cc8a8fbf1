#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdcost/timeutil.hpp"

namespace rdcost {

/// Bidding zones in canonical order. Every per-zone array in the library is
/// indexed by this order.
enum class Zone : std::uint8_t { North, CenterNorth, CenterSouth, South, Rossano, Sardinia, Sicily };

inline constexpr std::size_t kZoneCount = 7;
inline constexpr std::array<Zone, kZoneCount> kZones = {Zone::North,   Zone::CenterNorth, Zone::CenterSouth, Zone::South,
                                                        Zone::Rossano, Zone::Sardinia,    Zone::Sicily};

template <class T>
using ZoneArray = std::array<T, kZoneCount>;

inline constexpr std::size_t zone_index(Zone z) { return static_cast<std::size_t>(z); }

/// Rossano is a limited-production zone with no load of its own.
inline constexpr bool is_demand_zone(Zone z) { return z != Zone::Rossano; }

std::string_view zone_name(Zone z);
std::optional<Zone> parse_zone(std::string_view name);

/// One hour of one zone. Energy in MWh; NaN marks a missing cell before
/// gap filling. Only net imports may be negative.
struct HourlyZonalRecord {
  Hour timestamp = 0;
  Zone zone = Zone::North;
  double demand_mwh = 0.0;
  double demand_forecast_mwh = 0.0;
  double solar_mwh = 0.0;
  double solar_forecast_mwh = 0.0;
  double wind_mwh = 0.0;
  double wind_forecast_mwh = 0.0;
  double hydro_ror_mwh = 0.0;
  double net_imports_mwh = 0.0;
};

struct NationalHourlyRecord {
  Hour timestamp = 0;
  double redispatch_cost_eur = 0.0;  // may be negative
  double da_price_eur_mwh = 0.0;
  double gas_price_eur_mwh = 0.0;  // daily value repeated over the day's hours
};

struct CalendarFlags {
  bool workday = false;
  bool winter = false;

  friend bool operator==(const CalendarFlags&, const CalendarFlags&) = default;
};

/// October through April.
inline const std::set<unsigned> kDefaultWinterMonths = {10, 11, 12, 1, 2, 3, 4};
/// December through April, the narrower reading of the winter indicator.
inline const std::set<unsigned> kNarrowWinterMonths = {12, 1, 2, 3, 4};

struct IngestConfig {
  std::size_t max_gap = 6;
  /// Offset of the local market calendar (day boundaries, weekdays, months).
  int utc_offset_minutes = 0;
  std::set<unsigned> winter_months = kDefaultWinterMonths;
  /// Optional local-date window; defaults to the span of the input files.
  std::optional<Date> start;
  std::optional<Date> end;
};

struct IngestReport {
  std::size_t hours = 0;
  std::size_t expected_hours = 0;  // naive 24 * days count
  std::size_t interpolated_zonal_cells = 0;
  std::size_t interpolated_national_cells = 0;
  std::size_t interpolated_gas_days = 0;
  std::vector<std::string> warnings;

  std::size_t interpolated_total() const {
    return interpolated_zonal_cells + interpolated_national_cells + interpolated_gas_days;
  }
};

/// Gap-filled hourly grid. `zonal` is hour-major in canonical zone order, so
/// zonal.size() == 7 * hours.size(). Immutable once loaded.
struct MarketDataset {
  std::vector<Hour> hours;
  std::vector<Date> local_dates;
  std::vector<HourlyZonalRecord> zonal;
  std::vector<NationalHourlyRecord> national;
  std::vector<CalendarFlags> flags;
  int utc_offset_minutes = 0;
  IngestReport report;

  std::size_t size() const { return hours.size(); }
  const HourlyZonalRecord& at(std::size_t hour_index, Zone z) const { return zonal[hour_index * kZoneCount + zone_index(z)]; }
};

inline constexpr std::string_view kZonalHeader =
    "timestamp,zone,demand_mwh,demand_forecast_mwh,solar_mwh,solar_forecast_mwh,wind_mwh,wind_forecast_mwh,"
    "hydro_ror_mwh,net_imports_mwh";
inline constexpr std::string_view kNationalHeader = "timestamp,redispatch_cost_eur,da_price_eur_mwh,gas_price_eur_mwh";

MarketDataset load_dataset(const std::filesystem::path& zonal_path, const std::filesystem::path& national_path,
                           const std::filesystem::path& holidays_path, const IngestConfig& config);

MarketDataset load_dataset(std::istream& zonal, std::istream& national, const std::set<Date>& holidays,
                           const IngestConfig& config);

/// Canonical CSV output; byte-identical to canonical input for gap-free data.
void write_dataset(const MarketDataset& ds, std::ostream& zonal, std::ostream& national);
void write_dataset(const MarketDataset& ds, const std::filesystem::path& zonal_path,
                   const std::filesystem::path& national_path);

std::set<Date> parse_holidays(std::istream& in);
std::set<Date> load_holidays(const std::filesystem::path& path);

/// Fills interior NaN runs by linear interpolation between the nearest
/// present neighbours. Throws DataError(Gap) for runs longer than max_gap
/// and DataError(Boundary) for leading or trailing missing values.
std::vector<double> interpolate_gaps(std::span<const double> series, std::size_t max_gap);

std::vector<CalendarFlags> annotate_calendar(std::span<const Hour> timestamps, const std::set<Date>& holidays,
                                             const std::set<unsigned>& winter_months, int utc_offset_minutes = 0);

}  // namespace rdcost

#include "rdcost/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "rdcost/csv.hpp"
#include "rdcost/error.hpp"

namespace rdcost {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::string_view, kZoneCount> kZoneNames = {"North",   "CenterNorth", "CenterSouth", "South",
                                                                 "Rossano", "Sardinia",    "Sicily"};

constexpr std::array<std::string_view, 8> kZonalFields = {"demand_mwh", "demand_forecast_mwh", "solar_mwh",
                                                          "solar_forecast_mwh", "wind_mwh", "wind_forecast_mwh",
                                                          "hydro_ror_mwh", "net_imports_mwh"};

double& zonal_field(HourlyZonalRecord& r, std::size_t i) {
  switch (i) {
    case 0: return r.demand_mwh;
    case 1: return r.demand_forecast_mwh;
    case 2: return r.solar_mwh;
    case 3: return r.solar_forecast_mwh;
    case 4: return r.wind_mwh;
    case 5: return r.wind_forecast_mwh;
    case 6: return r.hydro_ror_mwh;
    default: return r.net_imports_mwh;
  }
}

double zonal_field(const HourlyZonalRecord& r, std::size_t i) {
  return zonal_field(const_cast<HourlyZonalRecord&>(r), i);
}

struct RawFile {
  int offset_minutes = 0;
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows;  // (line number, fields)
  std::vector<std::string> storage;
};

// Reads "# key: value" comment lines, the header and the data rows.
RawFile read_csv(std::istream& in, std::string_view expected_header, std::size_t expected_fields) {
  RawFile raw;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<std::pair<std::size_t, std::string>> lines;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = csv::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto colon = t.find(':');
      if (colon != std::string_view::npos) {
        std::string_view key = csv::trim(t.substr(1, colon - 1));
        const std::string_view value = csv::trim(t.substr(colon + 1));
        if (key == "timezone" || key == "tz") {
          const auto off = parse_utc_offset(value);
          if (!off) throw ParseError(lineno, "unsupported timezone declaration '" + std::string(value) + "'");
          raw.offset_minutes = *off;
        }
      }
      continue;
    }
    if (!header_seen) {
      if (t != expected_header) {
        throw ParseError(lineno, "unexpected header '" + std::string(t) + "', expected '" +
                                     std::string(expected_header) + "'");
      }
      header_seen = true;
      continue;
    }
    lines.emplace_back(lineno, std::string(t));
  }
  if (!header_seen) throw ParseError(lineno, "missing header");
  raw.storage.reserve(lines.size());
  raw.rows.reserve(lines.size());
  for (auto& [n, text] : lines) {
    raw.storage.push_back(std::move(text));
    auto fields = csv::split(raw.storage.back());
    if (fields.size() != expected_fields) {
      throw ParseError(n, "expected " + std::to_string(expected_fields) + " fields, got " +
                              std::to_string(fields.size()));
    }
    raw.rows.emplace_back(n, std::move(fields));
  }
  return raw;
}

Hour parse_row_timestamp(std::size_t line, std::string_view field, int offset) {
  const auto h = parse_timestamp(csv::trim(field), offset);
  if (!h) throw ParseError(line, "malformed timestamp '" + std::string(field) + "'");
  return *h;
}

double parse_row_number(std::size_t line, std::string_view field, std::string_view name) {
  const auto v = csv::parse_cell(field);
  if (!v) throw ParseError(line, "malformed value '" + std::string(field) + "' in column " + std::string(name));
  return *v;
}

void fill_series(std::vector<double>& series, std::size_t max_gap, const std::string& label, std::size_t& filled,
                 Hour grid_start) {
  const auto missing = static_cast<std::size_t>(std::count_if(series.begin(), series.end(), [](double v) { return std::isnan(v); }));
  if (missing == 0) return;
  try {
    series = interpolate_gaps(series, max_gap);
  } catch (const DataError& e) {
    throw DataError(e.kind(), label + " (grid starts " + format_timestamp(grid_start) + "): " + e.what());
  }
  filled += missing;
}

}  // namespace

std::string_view zone_name(Zone z) { return kZoneNames[zone_index(z)]; }

std::optional<Zone> parse_zone(std::string_view name) {
  for (std::size_t i = 0; i < kZoneCount; ++i) {
    if (kZoneNames[i] == name) return kZones[i];
  }
  return std::nullopt;
}

std::vector<double> interpolate_gaps(std::span<const double> series, std::size_t max_gap) {
  std::vector<double> out(series.begin(), series.end());
  const std::size_t n = out.size();
  std::size_t i = 0;
  while (i < n) {
    if (!std::isnan(out[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && std::isnan(out[j])) ++j;
    if (i == 0 || j == n) {
      throw DataError(DataError::Kind::Boundary, "missing values at series boundary (index " + std::to_string(i) +
                                                     ".." + std::to_string(j - 1) + ")");
    }
    const std::size_t run = j - i;
    if (run > max_gap) {
      throw DataError(DataError::Kind::Gap, "gap of " + std::to_string(run) + " consecutive missing values at index " +
                                                std::to_string(i) + " exceeds max_gap " + std::to_string(max_gap));
    }
    const double left = out[i - 1];
    const double right = out[j];
    const double span = static_cast<double>(run + 1);
    for (std::size_t k = i; k < j; ++k) {
      const double w = static_cast<double>(k - i + 1) / span;
      out[k] = left + w * (right - left);
    }
    i = j;
  }
  return out;
}

std::vector<CalendarFlags> annotate_calendar(std::span<const Hour> timestamps, const std::set<Date>& holidays,
                                             const std::set<unsigned>& winter_months, int utc_offset_minutes) {
  if (winter_months.empty()) throw SpecError("winter month set must not be empty");
  std::vector<CalendarFlags> out;
  out.reserve(timestamps.size());
  for (Hour h : timestamps) {
    const Date d = local_date(h, utc_offset_minutes);
    const bool weekend = iso_weekday_index(d) >= 5;
    out.push_back({.workday = !weekend && !holidays.contains(d), .winter = winter_months.contains(month_of(d))});
  }
  return out;
}

std::set<Date> parse_holidays(std::istream& in) {
  std::set<Date> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view t = line;
    if (const auto hash = t.find('#'); hash != std::string_view::npos) t = t.substr(0, hash);
    t = csv::trim(t);
    if (t.empty()) continue;
    const auto d = parse_date(t);
    if (!d) throw ParseError(lineno, "malformed holiday date '" + std::string(t) + "'");
    out.insert(*d);
  }
  return out;
}

std::set<Date> load_holidays(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::Io, "cannot open holidays file " + path.string());
  return parse_holidays(in);
}

MarketDataset load_dataset(std::istream& zonal_in, std::istream& national_in, const std::set<Date>& holidays,
                           const IngestConfig& config) {
  const RawFile zraw = read_csv(zonal_in, kZonalHeader, 2 + kZonalFields.size());
  const RawFile nraw = read_csv(national_in, kNationalHeader, 4);

  std::map<std::pair<Hour, std::size_t>, HourlyZonalRecord> zonal_rows;
  for (const auto& [line, f] : zraw.rows) {
    HourlyZonalRecord r;
    r.timestamp = parse_row_timestamp(line, f[0], zraw.offset_minutes);
    const auto zone = parse_zone(csv::trim(f[1]));
    if (!zone) throw ParseError(line, "unknown zone '" + std::string(f[1]) + "'");
    r.zone = *zone;
    for (std::size_t k = 0; k < kZonalFields.size(); ++k) {
      const double v = parse_row_number(line, f[2 + k], kZonalFields[k]);
      if (k != 7 && v < 0.0) throw ParseError(line, "negative value in column " + std::string(kZonalFields[k]));
      zonal_field(r, k) = v;
    }
    if (!zonal_rows.emplace(std::pair{r.timestamp, zone_index(r.zone)}, r).second) {
      throw DataError(DataError::Kind::Duplicate, "line " + std::to_string(line) + ": duplicate record for " +
                                                      format_timestamp(r.timestamp) + " zone " +
                                                      std::string(zone_name(r.zone)));
    }
  }

  std::map<Hour, NationalHourlyRecord> national_rows;
  for (const auto& [line, f] : nraw.rows) {
    NationalHourlyRecord r;
    r.timestamp = parse_row_timestamp(line, f[0], nraw.offset_minutes);
    r.redispatch_cost_eur = parse_row_number(line, f[1], "redispatch_cost_eur");
    r.da_price_eur_mwh = parse_row_number(line, f[2], "da_price_eur_mwh");
    r.gas_price_eur_mwh = parse_row_number(line, f[3], "gas_price_eur_mwh");
    if (r.da_price_eur_mwh < 0.0) throw ParseError(line, "negative day-ahead price");
    if (r.gas_price_eur_mwh <= 0.0) throw ParseError(line, "gas price must be positive");
    if (!national_rows.emplace(r.timestamp, r).second) {
      throw DataError(DataError::Kind::Duplicate,
                      "line " + std::to_string(line) + ": duplicate national record for " + format_timestamp(r.timestamp));
    }
  }

  const int offset = config.utc_offset_minutes;
  Hour grid_start = 0;
  Hour grid_end = -1;
  if (config.start) {
    grid_start = first_hour_of(*config.start, offset);
  } else {
    Hour lo = std::numeric_limits<Hour>::max();
    if (!zonal_rows.empty()) lo = std::min(lo, zonal_rows.begin()->first.first);
    if (!national_rows.empty()) lo = std::min(lo, national_rows.begin()->first);
    if (lo == std::numeric_limits<Hour>::max()) throw DataError(DataError::Kind::Completeness, "input files hold no rows");
    grid_start = lo;
  }
  if (config.end) {
    grid_end = first_hour_of(*config.end + std::chrono::days{1}, offset) - 1;
  } else {
    Hour hi = std::numeric_limits<Hour>::min();
    if (!zonal_rows.empty()) hi = std::max(hi, zonal_rows.rbegin()->first.first);
    if (!national_rows.empty()) hi = std::max(hi, national_rows.rbegin()->first);
    grid_end = hi;
  }
  if (grid_end < grid_start) throw RangeError("empty ingestion window");

  const auto n = static_cast<std::size_t>(grid_end - grid_start + 1);
  MarketDataset ds;
  ds.utc_offset_minutes = offset;
  ds.hours.resize(n);
  ds.local_dates.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.hours[i] = grid_start + static_cast<Hour>(i);
    ds.local_dates[i] = local_date(ds.hours[i], offset);
  }

  // Zonal: one series per (zone, field) across the grid.
  ds.zonal.resize(n * kZoneCount);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      auto& r = ds.zonal[i * kZoneCount + z];
      r.timestamp = ds.hours[i];
      r.zone = kZones[z];
      for (std::size_t k = 0; k < kZonalFields.size(); ++k) zonal_field(r, k) = kMissing;
    }
  }
  for (const auto& [key, rec] : zonal_rows) {
    if (key.first < grid_start || key.first > grid_end) continue;
    ds.zonal[static_cast<std::size_t>(key.first - grid_start) * kZoneCount + key.second] = rec;
  }
  std::vector<double> series(n);
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    for (std::size_t k = 0; k < kZonalFields.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) series[i] = zonal_field(ds.zonal[i * kZoneCount + z], k);
      fill_series(series, config.max_gap,
                  "zone " + std::string(kZoneNames[z]) + ", column " + std::string(kZonalFields[k]),
                  ds.report.interpolated_zonal_cells, grid_start);
      for (std::size_t i = 0; i < n; ++i) zonal_field(ds.zonal[i * kZoneCount + z], k) = series[i];
    }
  }

  // National hourly series.
  std::vector<double> cost(n, kMissing), price(n, kMissing), gas_hourly(n, kMissing);
  for (const auto& [h, rec] : national_rows) {
    if (h < grid_start || h > grid_end) continue;
    const auto i = static_cast<std::size_t>(h - grid_start);
    cost[i] = rec.redispatch_cost_eur;
    price[i] = rec.da_price_eur_mwh;
    gas_hourly[i] = rec.gas_price_eur_mwh;
  }
  fill_series(cost, config.max_gap, "national redispatch_cost_eur", ds.report.interpolated_national_cells, grid_start);
  fill_series(price, config.max_gap, "national da_price_eur_mwh", ds.report.interpolated_national_cells, grid_start);

  // Gas is a daily quantity: interpolate on the daily series, then repeat.
  std::vector<Date> days;
  std::vector<std::size_t> day_of_hour(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (days.empty() || days.back() != ds.local_dates[i]) days.push_back(ds.local_dates[i]);
    day_of_hour[i] = days.size() - 1;
  }
  std::vector<double> gas_daily(days.size(), kMissing);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(gas_daily[day_of_hour[i]]) && !std::isnan(gas_hourly[i])) gas_daily[day_of_hour[i]] = gas_hourly[i];
  }
  fill_series(gas_daily, config.max_gap, "national gas_price_eur_mwh (daily)", ds.report.interpolated_gas_days,
              grid_start);

  ds.national.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.national[i] = {.timestamp = ds.hours[i],
                      .redispatch_cost_eur = cost[i],
                      .da_price_eur_mwh = price[i],
                      .gas_price_eur_mwh = gas_daily[day_of_hour[i]]};
  }

  ds.flags = annotate_calendar(ds.hours, holidays, config.winter_months, offset);

  ds.report.hours = n;
  const auto first_day = local_date(grid_start, offset);
  const auto last_day = local_date(grid_end, offset);
  ds.report.expected_hours = static_cast<std::size_t>((last_day - first_day).count() + 1) * 24;
  if (ds.report.hours != ds.report.expected_hours) {
    ds.report.warnings.push_back("hour count " + std::to_string(ds.report.hours) + " differs from 24 x days = " +
                                 std::to_string(ds.report.expected_hours));
  }
  return ds;
}

MarketDataset load_dataset(const std::filesystem::path& zonal_path, const std::filesystem::path& national_path,
                           const std::filesystem::path& holidays_path, const IngestConfig& config) {
  std::ifstream zin(zonal_path);
  if (!zin) throw DataError(DataError::Kind::Io, "cannot open zonal file " + zonal_path.string());
  std::ifstream nin(national_path);
  if (!nin) throw DataError(DataError::Kind::Io, "cannot open national file " + national_path.string());
  return load_dataset(zin, nin, load_holidays(holidays_path), config);
}

void write_dataset(const MarketDataset& ds, std::ostream& zonal, std::ostream& national) {
  zonal << kZonalHeader << '\n';
  for (const auto& r : ds.zonal) {
    zonal << format_timestamp(r.timestamp) << ',' << zone_name(r.zone);
    for (std::size_t k = 0; k < kZonalFields.size(); ++k) zonal << ',' << csv::format_number(zonal_field(r, k));
    zonal << '\n';
  }
  national << kNationalHeader << '\n';
  for (const auto& r : ds.national) {
    national << format_timestamp(r.timestamp) << ',' << csv::format_number(r.redispatch_cost_eur) << ','
             << csv::format_number(r.da_price_eur_mwh) << ',' << csv::format_number(r.gas_price_eur_mwh) << '\n';
  }
}

void write_dataset(const MarketDataset& ds, const std::filesystem::path& zonal_path,
                   const std::filesystem::path& national_path) {
  std::ofstream z(zonal_path, std::ios::binary);
  std::ofstream nat(national_path, std::ios::binary);
  if (!z || !nat) throw DataError(DataError::Kind::Io, "cannot write dataset files");
  write_dataset(ds, z, nat);
}

}  // namespace rdcost

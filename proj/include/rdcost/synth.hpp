#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

#include <json.hpp>

#include "rdcost/market_data.hpp"

namespace rdcost::synth {

/// cost = intercept + linear*nd + quadratic*nd^2 + forecast_error*|nd - nd_fc| + workday*1{workday}
///        + N(0, noise_std^2), with nd and nd_fc the system totals in MWh.
/// The defaults give 2e-3 * (nd - 20000)^2 + 120000: convex, with costs
/// rising as net demand falls below 20 GWh.
struct CostParams {
  double intercept = 920000.0;   // EUR
  double linear = -80.0;         // EUR/MWh
  double quadratic = 2e-3;       // EUR/MWh^2
  double forecast_error = 30.0;  // EUR/MWh
  double workday = 15000.0;      // EUR
  double noise_std = 60000.0;    // EUR
};

struct LockdownShock {
  DateRange window{make_date(2020, 3, 8), make_date(2020, 4, 26)};
  /// Applied to demand and its forecast inside the window.
  double demand_multiplier = 1.0;
  /// Applied to the noiseless cost inside the window.
  double cost_multiplier = 1.25;
};

struct GeneratorConfig {
  DateRange range{make_date(2017, 1, 1), make_date(2020, 4, 26)};
  std::uint64_t seed = 1;
  int utc_offset_minutes = 0;
  /// Mean hourly demand per zone, MWh.
  ZoneArray<double> zone_scales{17000.0, 3300.0, 5000.0, 3000.0, 0.0, 1100.0, 2200.0};
  /// Clear-sky noon solar output per zone, MWh.
  ZoneArray<double> solar_peak{4000.0, 1200.0, 1600.0, 2400.0, 200.0, 700.0, 1200.0};
  /// Mean wind output per zone, MWh.
  ZoneArray<double> wind_mean{20.0, 40.0, 300.0, 1500.0, 50.0, 250.0, 350.0};
  ZoneArray<double> hydro_mean{2500.0, 200.0, 300.0, 100.0, 50.0, 20.0, 30.0};
  ZoneArray<double> imports_mean{4200.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  /// Relative sd of the demand forecast error.
  double demand_forecast_noise = 0.02;
  CostParams cost;
  std::optional<LockdownShock> lockdown = LockdownShock{};
};

/// Noiseless cost and the inputs it was computed from, per hour.
struct GroundTruth {
  CostParams params;
  std::vector<Hour> hours;
  std::vector<double> nd_system;
  std::vector<double> nd_fc_system;
  std::vector<bool> workday;
  std::vector<double> cost_multiplier;  // 1 outside the lockdown window
  std::vector<double> noiseless_cost;   // EUR, multiplier applied

  /// Cost function without noise or shock.
  double cost(double nd_sys, double nd_fc_sys, bool is_workday) const;
};

struct Generated {
  MarketDataset dataset;
  std::set<Date> holidays;
  GroundTruth truth;
};

/// Fixed public holidays plus Easter Monday for every year in the range.
std::set<Date> italian_holidays(int first_year, int last_year);
Date easter_sunday(int year);

/// Throws RangeError for an invalid configuration.
void validate(const GeneratorConfig& config);

/// Deterministic in the config. The random draws do not depend on the
/// lockdown settings, so two configs differing only in `lockdown` produce
/// identical data outside the window.
Generated generate(const GeneratorConfig& config);

void write_holidays(const std::set<Date>& holidays, std::ostream& out);

/// Writes zonal.csv, national.csv and holidays.txt into `dir`.
void write_files(const Generated& g, const std::filesystem::path& dir);

nlohmann::json config_to_json(const GeneratorConfig& c);
GeneratorConfig config_from_json(const nlohmann::json& j);

}  // namespace rdcost::synth

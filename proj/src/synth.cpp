#include "rdcost/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

#include "rdcost/error.hpp"
#include "rdcost/net_demand.hpp"
#include "rdcost/rng.hpp"

namespace rdcost::synth {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum Stream : std::uint64_t { DemandNoise, Clouds, Wind, ForecastNoise, Hydro, Gas, DaPrice, CostNoise };

double round_to(double x, double unit) { return std::round(x / unit) * unit + 0.0; }
double mwh(double x) { return std::round(x * 10.0) / 10.0 + 0.0; }

int day_of_year(Date d) { return static_cast<int>((d - make_date(year_of(d), 1, 1)).count()); }

double demand_profile(int hour, unsigned weekday, bool holiday, int doy) {
  const double h = hour + 0.5;
  const double diurnal = 1.0 - 0.16 * std::cos(kTwoPi * (h - 3.0) / 24.0) + 0.04 * std::cos(2.0 * kTwoPi * (h - 19.0) / 24.0);
  double weekly = 1.0;
  if (holiday || weekday == 6) {
    weekly = 0.8;
  } else if (weekday == 5) {
    weekly = 0.9;
  }
  const double seasonal = 1.0 + 0.07 * std::cos(kTwoPi * (doy - 200) / 365.0) + 0.05 * std::cos(2.0 * kTwoPi * (doy - 15) / 365.0);
  return diurnal * weekly * seasonal;
}

double solar_shape(int hour, int doy) {
  const double season = std::sin(kTwoPi * (doy - 80) / 365.0);
  const double daylight = 12.0 + 3.5 * season;
  const double sunrise = 12.5 - daylight / 2.0;
  const double x = (hour + 0.5 - sunrise) / daylight;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return (0.75 + 0.25 * season) * std::sin(std::numbers::pi * x);
}

nlohmann::json zone_array_json(const ZoneArray<double>& a) {
  nlohmann::json j = nlohmann::json::object();
  for (Zone z : kZones) j[std::string(zone_name(z))] = a[zone_index(z)];
  return j;
}

ZoneArray<double> zone_array_from(const nlohmann::json& j, const ZoneArray<double>& fallback) {
  ZoneArray<double> a = fallback;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto z = parse_zone(it.key());
    if (!z) throw SpecError("unknown zone '" + it.key() + "'");
    a[zone_index(*z)] = it.value().get<double>();
  }
  return a;
}

}  // namespace

double GroundTruth::cost(double nd_sys, double nd_fc_sys, bool is_workday) const {
  return params.intercept + params.linear * nd_sys + params.quadratic * nd_sys * nd_sys +
         params.forecast_error * std::abs(nd_sys - nd_fc_sys) + (is_workday ? params.workday : 0.0);
}

Date easter_sunday(int year) {
  // anonymous Gregorian algorithm
  const int a = year % 19;
  const int b = year / 100;
  const int c = year % 100;
  const int d = b / 4;
  const int e = b % 4;
  const int f = (b + 8) / 25;
  const int g = (b - f + 1) / 3;
  const int h = (19 * a + b - d - g + 15) % 30;
  const int i = c / 4;
  const int k = c % 4;
  const int l = (32 + 2 * e + 2 * i - h - k) % 7;
  const int m = (a + 11 * h + 22 * l) / 451;
  const int month = (h + l - 7 * m + 114) / 31;
  const int day = (h + l - 7 * m + 114) % 31 + 1;
  return make_date(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
}

std::set<Date> italian_holidays(int first_year, int last_year) {
  static constexpr std::pair<unsigned, unsigned> kFixed[] = {{1, 1},  {1, 6},  {4, 25},  {5, 1},   {6, 2},
                                                             {8, 15}, {11, 1}, {12, 8}, {12, 25}, {12, 26}};
  std::set<Date> out;
  for (int y = first_year; y <= last_year; ++y) {
    for (auto [m, d] : kFixed) out.insert(make_date(y, m, d));
    out.insert(easter_sunday(y) + std::chrono::days{1});
  }
  return out;
}

void validate(const GeneratorConfig& c) {
  if (c.range.empty()) throw RangeError("generator date range is empty");
  if (c.utc_offset_minutes % 60 != 0) throw RangeError("generator offset must be whole hours");
  if (!(c.cost.noise_std >= 0.0)) throw RangeError("noise_std must be non-negative");
  if (!(c.demand_forecast_noise >= 0.0)) throw RangeError("demand forecast noise must be non-negative");
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    if (!(c.zone_scales[z] >= 0.0) || !(c.solar_peak[z] >= 0.0) || !(c.wind_mean[z] >= 0.0) || !(c.hydro_mean[z] >= 0.0)) {
      throw RangeError("zone magnitudes must be non-negative");
    }
  }
  if (c.lockdown) {
    const auto& s = *c.lockdown;
    if (!(s.demand_multiplier > 0.0 && s.demand_multiplier <= 1.0)) {
      throw RangeError("lockdown demand multiplier must lie in (0, 1]");
    }
    if (!(s.cost_multiplier > 0.0)) throw RangeError("lockdown cost multiplier must be positive");
    if (s.window.empty()) throw RangeError("lockdown window is empty");
  }
}

Generated generate(const GeneratorConfig& c) {
  validate(c);
  const int off = c.utc_offset_minutes;
  const Hour h0 = first_hour_of(c.range.first, off);
  const Hour h1 = first_hour_of(c.range.last + std::chrono::days{1}, off);
  const auto n = static_cast<std::size_t>(h1 - h0);

  Generated g;
  g.holidays = italian_holidays(year_of(c.range.first), year_of(c.range.last));
  MarketDataset& ds = g.dataset;
  ds.utc_offset_minutes = off;
  ds.hours.resize(n);
  ds.local_dates.resize(n);
  ds.zonal.resize(n * kZoneCount);
  ds.national.resize(n);

  GroundTruth& truth = g.truth;
  truth.params = c.cost;
  truth.hours.resize(n);
  truth.nd_system.resize(n);
  truth.nd_fc_system.resize(n);
  truth.workday.resize(n);
  truth.cost_multiplier.assign(n, 1.0);
  truth.noiseless_cost.resize(n);

  Rng demand_rng(derive_seed(c.seed, DemandNoise));
  Rng cloud_rng(derive_seed(c.seed, Clouds));
  Rng wind_rng(derive_seed(c.seed, Wind));
  Rng fc_rng(derive_seed(c.seed, ForecastNoise));
  Rng hydro_rng(derive_seed(c.seed, Hydro));
  Rng gas_rng(derive_seed(c.seed, Gas));
  Rng price_rng(derive_seed(c.seed, DaPrice));
  Rng cost_rng(derive_seed(c.seed, CostNoise));

  ZoneArray<double> demand_ar{};
  ZoneArray<double> wind_ar{};
  ZoneArray<double> cloud{};
  ZoneArray<double> hydro_day{};
  double gas_log = 0.0;
  double gas = 20.0;
  const double wind_phi = 0.97;
  const double wind_innov = std::sqrt(1.0 - wind_phi * wind_phi);
  for (auto& w : wind_ar) w = wind_rng.normal();

  Date current_day{};
  for (std::size_t t = 0; t < n; ++t) {
    const Hour hour = h0 + static_cast<Hour>(t);
    const Date day = local_date(hour, off);
    const int hod = local_hour_of_day(hour, off);
    const int doy = day_of_year(day);
    const unsigned wd = iso_weekday_index(day);
    const bool holiday = g.holidays.contains(day);
    if (t == 0 || day != current_day) {
      current_day = day;
      for (auto& cl : cloud) cl = std::clamp(0.8 + 0.25 * cloud_rng.normal(), 0.15, 1.0);
      for (auto& hy : hydro_day) hy = 1.0 + 0.05 * hydro_rng.normal();
      gas_log = 0.9 * gas_log + 0.05 * gas_rng.normal();
      gas = round_to(20.0 * std::exp(gas_log), 0.01);
    }
    const bool in_lockdown = c.lockdown && c.lockdown->window.contains(day);
    const double demand_mult = in_lockdown ? c.lockdown->demand_multiplier : 1.0;

    ds.hours[t] = hour;
    ds.local_dates[t] = day;
    const double profile = demand_profile(hod, wd, holiday, doy);
    const double solar = solar_shape(hod, doy);
    const double wind_season = 1.0 + 0.2 * std::cos(kTwoPi * doy / 365.0);
    const double hydro_season = 1.0 + 0.3 * std::sin(kTwoPi * (doy - 60) / 365.0);

    ZoneArray<double> nd{};
    ZoneArray<double> nd_fc{};
    for (Zone z : kZones) {
      const std::size_t zi = zone_index(z);
      demand_ar[zi] = 0.9 * demand_ar[zi] + 0.015 * std::sqrt(1.0 - 0.81) * demand_rng.normal();
      wind_ar[zi] = wind_phi * wind_ar[zi] + wind_innov * wind_rng.normal();
      const double e_demand = fc_rng.normal();
      const double e_solar = fc_rng.normal();
      const double e_wind = fc_rng.normal();
      const double e_imports = hydro_rng.normal();

      HourlyZonalRecord& r = ds.zonal[t * kZoneCount + zi];
      r.timestamp = hour;
      r.zone = z;
      const double demand = c.zone_scales[zi] * profile * (1.0 + demand_ar[zi]);
      r.demand_mwh = mwh(std::max(0.0, demand * demand_mult));
      r.demand_forecast_mwh =
          mwh(std::max(0.0, demand * (1.0 + c.demand_forecast_noise * e_demand) * demand_mult));
      const double s = c.solar_peak[zi] * solar * cloud[zi];
      r.solar_mwh = mwh(s);
      r.solar_forecast_mwh = mwh(std::max(0.0, s * (1.0 + 0.12 * e_solar)));
      const double w = c.wind_mean[zi] * wind_season * std::exp(0.6 * wind_ar[zi] - 0.18);
      r.wind_mwh = mwh(w);
      r.wind_forecast_mwh = mwh(w * std::exp(0.15 * e_wind - 0.01125));
      r.hydro_ror_mwh = mwh(std::max(0.0, c.hydro_mean[zi] * hydro_season * hydro_day[zi]));
      r.net_imports_mwh = mwh(c.imports_mean[zi] * (1.0 + 0.05 * std::cos(kTwoPi * (hod - 4) / 24.0) + 0.05 * e_imports));
      nd[zi] = zonal_net_demand(r);
      nd_fc[zi] = zonal_net_demand_forecast(r);
    }
    const double nd_sys = system_sum(nd);
    const double nd_fc_sys = system_sum(nd_fc);
    const bool workday = wd < 5 && !holiday;
    const double mult = in_lockdown ? c.lockdown->cost_multiplier : 1.0;

    truth.hours[t] = hour;
    truth.nd_system[t] = nd_sys;
    truth.nd_fc_system[t] = nd_fc_sys;
    truth.workday[t] = workday;
    truth.cost_multiplier[t] = mult;
    truth.noiseless_cost[t] = mult * truth.cost(nd_sys, nd_fc_sys, workday);

    const double price_noise = price_rng.normal();
    const double cost_noise = cost_rng.normal();
    NationalHourlyRecord& nat = ds.national[t];
    nat.timestamp = hour;
    nat.gas_price_eur_mwh = gas;
    nat.da_price_eur_mwh = round_to(std::max(0.0, 8.0 + 1.6 * gas + 0.0012 * nd_sys + 4.0 * price_noise), 0.01);
    nat.redispatch_cost_eur = round_to(truth.noiseless_cost[t] + c.cost.noise_std * cost_noise, 0.01);
  }

  ds.flags = annotate_calendar(ds.hours, g.holidays, kDefaultWinterMonths, off);
  ds.report.hours = n;
  ds.report.expected_hours = static_cast<std::size_t>(c.range.days()) * 24;
  return g;
}

void write_holidays(const std::set<Date>& holidays, std::ostream& out) {
  out << "# public holidays, one ISO date per line\n";
  for (Date d : holidays) out << format_date(d) << '\n';
}

void write_files(const Generated& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_dataset(g.dataset, dir / "zonal.csv", dir / "national.csv");
  std::ofstream h(dir / "holidays.txt", std::ios::binary);
  if (!h) throw DataError(DataError::Kind::Io, "cannot write " + (dir / "holidays.txt").string());
  write_holidays(g.holidays, h);
}

nlohmann::json config_to_json(const GeneratorConfig& c) {
  nlohmann::json j;
  j["range"] = {format_date(c.range.first), format_date(c.range.last)};
  j["seed"] = c.seed;
  j["utc_offset_minutes"] = c.utc_offset_minutes;
  j["zone_scales"] = zone_array_json(c.zone_scales);
  j["solar_peak"] = zone_array_json(c.solar_peak);
  j["wind_mean"] = zone_array_json(c.wind_mean);
  j["hydro_mean"] = zone_array_json(c.hydro_mean);
  j["imports_mean"] = zone_array_json(c.imports_mean);
  j["demand_forecast_noise"] = c.demand_forecast_noise;
  j["cost"] = {{"intercept", c.cost.intercept},
               {"linear", c.cost.linear},
               {"quadratic", c.cost.quadratic},
               {"forecast_error", c.cost.forecast_error},
               {"workday", c.cost.workday},
               {"noise_std", c.cost.noise_std}};
  if (c.lockdown) {
    j["lockdown"] = {{"window", {format_date(c.lockdown->window.first), format_date(c.lockdown->window.last)}},
                     {"demand_multiplier", c.lockdown->demand_multiplier},
                     {"cost_multiplier", c.lockdown->cost_multiplier}};
  } else {
    j["lockdown"] = nullptr;
  }
  return j;
}

namespace {
DateRange range_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw SpecError("date range must be a two-element array");
  const auto a = parse_date(j[0].get<std::string>());
  const auto b = parse_date(j[1].get<std::string>());
  if (!a || !b) throw SpecError("malformed date in range");
  return {*a, *b};
}
}  // namespace

GeneratorConfig config_from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  if (j.contains("range")) c.range = range_from(j["range"]);
  c.seed = j.value("seed", c.seed);
  c.utc_offset_minutes = j.value("utc_offset_minutes", c.utc_offset_minutes);
  if (j.contains("zone_scales")) c.zone_scales = zone_array_from(j["zone_scales"], c.zone_scales);
  if (j.contains("solar_peak")) c.solar_peak = zone_array_from(j["solar_peak"], c.solar_peak);
  if (j.contains("wind_mean")) c.wind_mean = zone_array_from(j["wind_mean"], c.wind_mean);
  if (j.contains("hydro_mean")) c.hydro_mean = zone_array_from(j["hydro_mean"], c.hydro_mean);
  if (j.contains("imports_mean")) c.imports_mean = zone_array_from(j["imports_mean"], c.imports_mean);
  c.demand_forecast_noise = j.value("demand_forecast_noise", c.demand_forecast_noise);
  if (j.contains("cost")) {
    const auto& k = j["cost"];
    c.cost.intercept = k.value("intercept", c.cost.intercept);
    c.cost.linear = k.value("linear", c.cost.linear);
    c.cost.quadratic = k.value("quadratic", c.cost.quadratic);
    c.cost.forecast_error = k.value("forecast_error", c.cost.forecast_error);
    c.cost.workday = k.value("workday", c.cost.workday);
    c.cost.noise_std = k.value("noise_std", c.cost.noise_std);
  }
  if (j.contains("lockdown")) {
    const auto& l = j["lockdown"];
    if (l.is_null()) {
      c.lockdown.reset();
    } else {
      LockdownShock s;
      if (l.contains("window")) s.window = range_from(l["window"]);
      s.demand_multiplier = l.value("demand_multiplier", s.demand_multiplier);
      s.cost_multiplier = l.value("cost_multiplier", s.cost_multiplier);
      c.lockdown = s;
    }
  }
  validate(c);
  return c;
}

}  // namespace rdcost::synth

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rdcost/error.hpp"
#include "rdcost/net_demand.hpp"
#include "rdcost/synth.hpp"
#include "support.hpp"

using namespace rdcost;
using synth::GeneratorConfig;

namespace {

GeneratorConfig tiny(std::uint64_t seed = 2) {
  GeneratorConfig c;
  c.range = {make_date(2020, 2, 20), make_date(2020, 3, 20)};
  c.seed = seed;
  return c;
}

std::string dump(const synth::Generated& g) {
  std::ostringstream z, n;
  write_dataset(g.dataset, z, n);
  return z.str() + n.str();
}

}  // namespace

TEST(Synth, DeterministicInTheSeed) {
  EXPECT_EQ(dump(synth::generate(tiny(2))), dump(synth::generate(tiny(2))));
  EXPECT_NE(dump(synth::generate(tiny(2))), dump(synth::generate(tiny(3))));
}

TEST(Synth, GridShape) {
  const auto g = synth::generate(tiny());
  EXPECT_EQ(g.dataset.size(), 30u * 24u);
  EXPECT_EQ(g.dataset.zonal.size(), 7u * g.dataset.size());
  EXPECT_EQ(g.dataset.report.expected_hours, g.dataset.size());
  EXPECT_EQ(g.truth.hours, g.dataset.hours);
  for (std::size_t t = 1; t < g.dataset.size(); ++t) EXPECT_EQ(g.dataset.hours[t], g.dataset.hours[t - 1] + 1);
  // Rossano has no demand
  for (std::size_t t = 0; t < g.dataset.size(); t += 13) EXPECT_EQ(g.dataset.at(t, Zone::Rossano).demand_mwh, 0.0);
}

TEST(Synth, LockdownOnlyTouchesItsWindow) {
  auto with = tiny();
  with.lockdown->demand_multiplier = 0.8;
  auto without = tiny();
  without.lockdown.reset();
  const auto a = synth::generate(with);
  const auto b = synth::generate(without);
  const DateRange w = with.lockdown->window;
  std::size_t inside = 0;
  for (std::size_t t = 0; t < a.dataset.size(); ++t) {
    const auto& ra = a.dataset.at(t, Zone::North);
    const auto& rb = b.dataset.at(t, Zone::North);
    EXPECT_EQ(ra.solar_mwh, rb.solar_mwh);
    EXPECT_EQ(ra.wind_mwh, rb.wind_mwh);
    if (w.contains(a.dataset.local_dates[t])) {
      ++inside;
      EXPECT_NEAR(ra.demand_mwh, 0.8 * rb.demand_mwh, 0.1);
      EXPECT_EQ(a.truth.cost_multiplier[t], 1.25);
    } else {
      EXPECT_EQ(ra.demand_mwh, rb.demand_mwh);
      EXPECT_EQ(a.dataset.national[t].redispatch_cost_eur, b.dataset.national[t].redispatch_cost_eur);
      EXPECT_EQ(a.truth.cost_multiplier[t], 1.0);
    }
  }
  EXPECT_EQ(inside, 13u * 24u);
}

TEST(Synth, TruthMatchesTheData) {
  const auto g = synth::generate(tiny());
  const auto panel = build_panel(g.dataset);
  double resid = 0.0;
  for (std::size_t t = 0; t < panel.size(); ++t) {
    EXPECT_NEAR(panel.rows[t].nd_system, g.truth.nd_system[t], 1e-6);
    EXPECT_NEAR(panel.rows[t].nd_fc_system, g.truth.nd_fc_system[t], 1e-6);
    EXPECT_EQ(panel.rows[t].flags.workday, g.truth.workday[t]);
    const double r = (panel.rows[t].redispatch_cost - g.truth.noiseless_cost[t]) / g.truth.params.noise_std;
    resid += r * r;
  }
  // the noise is N(0, noise_std^2)
  EXPECT_NEAR(resid / double(panel.size()), 1.0, 0.2);
}

TEST(Synth, CostParametersAreRecoverable) {
  const auto g = synth::generate(tiny());
  const auto& tr = g.truth;
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (std::size_t t = 0; t < tr.hours.size(); ++t) {
    const double u = tr.nd_system[t] / 1e4;
    X.push_back({u, u * u, std::abs(tr.nd_system[t] - tr.nd_fc_system[t]), tr.workday[t] ? 1.0 : 0.0});
    y.push_back(tr.noiseless_cost[t] / tr.cost_multiplier[t]);
  }
  const auto b = oracle::normal_equations(X, y);
  const auto& p = tr.params;
  EXPECT_NEAR(b[0], p.intercept, 1e-6 * p.intercept);
  EXPECT_NEAR(b[1] / 1e4, p.linear, 1e-6 * std::abs(p.linear));
  EXPECT_NEAR(b[2] / 1e8, p.quadratic, 1e-6 * p.quadratic);
  EXPECT_NEAR(b[3], p.forecast_error, 1e-6 * p.forecast_error);
  EXPECT_NEAR(b[4], p.workday, 1e-6 * p.workday);
  // vertex of the default quadratic sits at 20 GWh
  EXPECT_NEAR(-p.linear / (2 * p.quadratic), 20000.0, 1e-9);
}

TEST(Synth, FilesLoadBackCleanly) {
  testkit::TempDir dir("synth");
  const auto g = synth::generate(tiny());
  synth::write_files(g, dir.path());
  const auto ds = load_dataset(dir / "zonal.csv", dir / "national.csv", dir / "holidays.txt", {});
  EXPECT_EQ(ds.size(), g.dataset.size());
  EXPECT_EQ(ds.report.interpolated_total(), 0u);
  EXPECT_TRUE(ds.report.warnings.empty());
  std::ostringstream z, n;
  write_dataset(ds, z, n);
  EXPECT_EQ(z.str() + n.str(), dump(g));
  EXPECT_EQ(load_holidays(dir / "holidays.txt"), g.holidays);
}

TEST(Synth, EasterAndHolidays) {
  EXPECT_EQ(synth::easter_sunday(2019), make_date(2019, 4, 21));
  EXPECT_EQ(synth::easter_sunday(2020), make_date(2020, 4, 12));
  EXPECT_EQ(synth::easter_sunday(2017), make_date(2017, 4, 16));
  EXPECT_EQ(synth::easter_sunday(2018), make_date(2018, 4, 1));
  const auto h = synth::italian_holidays(2020, 2020);
  EXPECT_EQ(h.size(), 11u);
  EXPECT_TRUE(h.contains(make_date(2020, 4, 13)));
  EXPECT_TRUE(h.contains(make_date(2020, 6, 2)));
  EXPECT_FALSE(h.contains(make_date(2020, 4, 12)));
}

TEST(Synth, ValidateRejectsBadConfigs) {
  auto bad = [](auto mutate) {
    GeneratorConfig c = tiny();
    mutate(c);
    return c;
  };
  EXPECT_THROW(synth::validate(bad([](auto& c) { c.range = {make_date(2020, 2, 2), make_date(2020, 2, 1)}; })),
               RangeError);
  EXPECT_THROW(synth::validate(bad([](auto& c) { c.utc_offset_minutes = 30; })), RangeError);
  EXPECT_THROW(synth::validate(bad([](auto& c) { c.cost.noise_std = -1; })), RangeError);
  EXPECT_THROW(synth::validate(bad([](auto& c) { c.zone_scales[0] = -1; })), RangeError);
  EXPECT_THROW(synth::validate(bad([](auto& c) { c.lockdown->demand_multiplier = 1.2; })), RangeError);
  EXPECT_THROW(synth::validate(bad([](auto& c) { c.lockdown->cost_multiplier = 0; })), RangeError);
  EXPECT_NO_THROW(synth::validate(bad([](auto& c) { c.lockdown.reset(); })));
}

TEST(Synth, ConfigJsonRoundTrip) {
  GeneratorConfig c = tiny(9);
  c.cost.quadratic = 3e-3;
  c.zone_scales[2] = 4000;
  c.lockdown->cost_multiplier = 1.4;
  const auto j = synth::config_to_json(c);
  const auto r = synth::config_from_json(j);
  EXPECT_EQ(synth::config_to_json(r), j);
  EXPECT_EQ(r.seed, 9u);
  EXPECT_EQ(r.zone_scales[2], 4000.0);
  auto no_shock = j;
  no_shock["lockdown"] = nullptr;
  EXPECT_FALSE(synth::config_from_json(no_shock).lockdown);
  EXPECT_THROW(synth::config_from_json({{"zone_scales", {{"Atlantis", 1.0}}}}), SpecError);
  EXPECT_THROW(synth::config_from_json({{"range", {"2020-01-01"}}}), SpecError);
  EXPECT_THROW(synth::config_from_json({{"seed", 1}, {"cost", {{"noise_std", -5.0}}}}), RangeError);
}

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "rdcost/error.hpp"
#include "rdcost/scenarios.hpp"
#include "rdcost/synth.hpp"
#include "support.hpp"

using namespace rdcost;

namespace {

struct Fixture {
  synth::Generated gen = synth::generate(testkit::small_generator(8));
  NetDemandPanel panel = build_panel(gen.dataset);
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

double total_res(const NetDemandPanel& p) {
  double s = 0.0;
  for (const auto& r : p.rows) s += system_sum(r.res);
  return s;
}

// Un-standardizes the zonal columns and evaluates the generator's noiseless
// cost function, so scenario effects can be checked against the truth.
DesignPredictor truth_predictor(const synth::GroundTruth& truth) {
  return [&truth](const DesignMatrix& d) {
    std::vector<std::size_t> nd_cols, fc_cols;
    std::size_t workday_col = 0;
    for (std::size_t c = 0; c < d.column_names.size(); ++c) {
      const auto& n = d.column_names[c];
      if (n.starts_with("nd_")) nd_cols.push_back(c);
      if (n.starts_with("ndfc_")) fc_cols.push_back(c);
      if (n == "workday") workday_col = c;
    }
    std::vector<double> out(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const auto row = d.X.row(i);
      auto raw = [&](std::size_t c) { return row[c] * d.scaler.std[c] + d.scaler.mean[c]; };
      double nd = 0.0, fc = 0.0;
      for (auto c : nd_cols) nd += raw(c);
      for (auto c : fc_cols) fc += raw(c);
      out[i] = truth.cost(nd, fc, raw(workday_col) > 0.5);
    }
    return out;
  };
}

ScenarioSpec spec_for(ScenarioKind kind, double factor = 2.0) {
  ScenarioSpec s;
  s.kind = kind;
  s.factor = factor;
  s.evaluation_range = {make_date(2019, 10, 1), make_date(2020, 3, 7)};
  s.model_spec = FeatureSpec::preferred();
  return s;
}

Scaler scaler_for(const NetDemandPanel& p) {
  return build_design(p, FeatureSpec::preferred(), make_split(testkit::small_in_sample(), 0.7, 1)).scaler;
}

}  // namespace

TEST(Scenarios, AllThreeRemoveTheSameEnergy) {
  const auto& p = fx().panel;
  const double want = total_res(p);  // factor 2 removes one extra copy of all wind and solar
  for (auto kind : {ScenarioKind::Scale, ScenarioKind::SmoothTime, ScenarioKind::SmoothTimeSpace}) {
    const double got = removed_energy(p, apply_scenario(p, kind, 2.0));
    EXPECT_NEAR(got, want, 1e-9 * want) << scenario_name(kind);
  }
  const double half = removed_energy(p, apply_scale(p, 1.5));
  EXPECT_NEAR(half, 0.5 * want, 1e-9 * want);
}

TEST(Scenarios, ScaleSubtractsHourlyRenewables) {
  const auto& p = fx().panel;
  const auto s = apply_scale(p, 3.0);
  for (std::size_t t = 0; t < p.size(); t += 97) {
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      EXPECT_DOUBLE_EQ(s.rows[t].nd[z], p.rows[t].nd[z] - 2.0 * p.rows[t].res[z]);
      EXPECT_DOUBLE_EQ(s.rows[t].nd_fc[z], p.rows[t].nd_fc[z] - 2.0 * p.rows[t].res_fc[z]);
    }
    EXPECT_NEAR(s.rows[t].nd_system, system_sum(s.rows[t].nd), 1e-6);
    EXPECT_EQ(s.rows[t].redispatch_cost, p.rows[t].redispatch_cost);
  }
}

TEST(Scenarios, SmoothTimeIsConstantPerZoneAndKeepsZoneTotals) {
  const auto& p = fx().panel;
  const auto s = apply_smooth_time(p, 2.0);
  const auto sc = apply_scale(p, 2.0);
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    const double shift0 = p.rows[0].nd[z] - s.rows[0].nd[z];
    double a = 0.0, b = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
      EXPECT_NEAR(p.rows[t].nd[z] - s.rows[t].nd[z], shift0, 1e-6);
      a += s.rows[t].nd[z];
      b += sc.rows[t].nd[z];
    }
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(b)) + 1e-3);
  }
}

TEST(Scenarios, SmoothTimeSpaceLeavesRossanoAndSplitsEvenly) {
  const auto& p = fx().panel;
  const auto s = apply_smooth_time_space(p, 2.0);
  const std::size_t ros = zone_index(Zone::Rossano);
  const double per_zone = total_res(p) / double(p.size()) / 6.0;
  for (std::size_t t = 0; t < p.size(); t += 31) {
    EXPECT_EQ(s.rows[t].nd[ros], p.rows[t].nd[ros]);
    for (Zone z : kZones) {
      if (!is_demand_zone(z)) continue;
      EXPECT_NEAR(p.rows[t].nd[zone_index(z)] - s.rows[t].nd[zone_index(z)], per_zone, 1e-6);
    }
  }
}

TEST(Scenarios, FactorOneIsIdentityAndBadFactorsThrow) {
  const auto& p = fx().panel;
  for (auto kind : {ScenarioKind::Scale, ScenarioKind::SmoothTime, ScenarioKind::SmoothTimeSpace}) {
    const auto s = apply_scenario(p, kind, 1.0);
    for (std::size_t t = 0; t < p.size(); t += 211) EXPECT_EQ(s.rows[t].nd, p.rows[t].nd);
    EXPECT_THROW(apply_scenario(p, kind, 0.0), RangeError);
    EXPECT_THROW(apply_scenario(p, kind, -1.0), RangeError);
    EXPECT_THROW(apply_scenario(p, kind, NAN), RangeError);
  }
  NetDemandPanel shorter = p;
  shorter.rows.pop_back();
  EXPECT_THROW(removed_energy(p, shorter), ShapeError);
}

TEST(Scenarios, NamesRoundTrip) {
  for (auto kind : {ScenarioKind::Scale, ScenarioKind::SmoothTime, ScenarioKind::SmoothTimeSpace}) {
    EXPECT_EQ(parse_scenario(scenario_name(kind)), kind);
  }
  EXPECT_FALSE(parse_scenario("double"));
}

TEST(RenewableEquivalence, WorkedNumbers) {
  const auto r = renewable_equivalence(31600, 4900, 0.20);
  // 1 + 0.2*31600/4900 and its product with 4900, by hand
  EXPECT_NEAR(r.factor, 2.289796, 1e-6);
  EXPECT_NEAR(r.implied_output_mwh, 11220.0, 1e-6);
  EXPECT_EQ(renewable_equivalence(31600, 4900, 0.0).factor, 1.0);
  EXPECT_THROW(renewable_equivalence(31600, 0.0, 0.2), NumericError);
  EXPECT_THROW(renewable_equivalence(31600, -1.0, 0.2), RangeError);
  EXPECT_THROW(renewable_equivalence(31600, 4900, 1.0), RangeError);
  EXPECT_THROW(renewable_equivalence(31600, 4900, -0.1), RangeError);
}

TEST(RunScenario, GroundTruthOrdering) {
  const auto& f = fx();
  const Scaler sc = scaler_for(f.panel);
  const auto pred = truth_predictor(f.gen.truth);
  std::vector<ScenarioOutcome> out;
  for (auto kind : {ScenarioKind::Scale, ScenarioKind::SmoothTime, ScenarioKind::SmoothTimeSpace}) {
    out.push_back(run_scenario(spec_for(kind), FeatureSpec::preferred(), sc, pred, f.panel));
  }
  for (const auto& o : out) {
    EXPECT_NEAR(o.removed_energy_mwh, out[0].removed_energy_mwh, 1e-9 * out[0].removed_energy_mwh);
    EXPECT_EQ(o.hours, out[0].hours);
    EXPECT_EQ(o.mean_baseline_predicted, out[0].mean_baseline_predicted);
    EXPECT_NEAR(o.relative_change_vs_predicted, o.delta_eur_per_hour / o.mean_baseline_predicted, 1e-12);
  }
  // The cost only sees system totals, and both smoothed variants shift the
  // system by the same constant.
  EXPECT_NEAR(out[1].delta_eur_per_hour, out[2].delta_eur_per_hour, 1e-6 * std::abs(out[1].delta_eur_per_hour));
  // Convex cost: removing hour-varying output adds variance the flat variants avoid.
  EXPECT_GE(out[0].delta_eur_per_hour, out[1].delta_eur_per_hour);
  EXPECT_EQ(out[0].hours, 24u * 159u);
}

TEST(RunScenario, RejectsWrongSpecAndEmptyRange) {
  const auto& f = fx();
  const Scaler sc = scaler_for(f.panel);
  const auto pred = truth_predictor(f.gen.truth);
  EXPECT_THROW(run_scenario(spec_for(ScenarioKind::Scale), FeatureSpec::dynamic(), sc, pred, f.panel), SpecError);
  auto s = spec_for(ScenarioKind::Scale);
  s.evaluation_range = {make_date(2015, 1, 1), make_date(2015, 2, 1)};
  try {
    run_scenario(s, FeatureSpec::preferred(), sc, pred, f.panel);
    FAIL() << "expected a coverage error";
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::Coverage);
  }
  // an MLP trained on the preferred layout cannot run the default scenario spec
  MlpModel m = init_model(17, MlpConfig{});
  m.spec = FeatureSpec::preferred();
  m.scaler = sc;
  EXPECT_THROW(run_scenario(ScenarioSpec{}, m, f.panel), SpecError);
}

TEST(RunScenario, Outputs) {
  const auto& f = fx();
  const auto o = run_scenario(spec_for(ScenarioKind::SmoothTime), FeatureSpec::preferred(), scaler_for(f.panel),
                              truth_predictor(f.gen.truth), f.panel);
  const auto j = scenario_outcome_to_json(o);
  EXPECT_EQ(j.at("kind"), "smooth_time");
  EXPECT_EQ(j.at("range")[0], "2019-10-01");
  EXPECT_EQ(j.at("smoothing_mean_res_mwh").size(), kZoneCount);
  std::ostringstream csv;
  write_scenario_table_csv({o, o}, csv);
  const std::string s = csv.str();
  EXPECT_TRUE(s.starts_with("kind,factor,delta_eur_per_hour,"));
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}

#include "rdcost/scenarios.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "rdcost/csv.hpp"
#include "rdcost/error.hpp"

namespace rdcost {
namespace {

void check_factor(double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw RangeError("scenario factor must be positive");
}

ZoneArray<double> mean_res(const NetDemandPanel& panel) {
  ZoneArray<double> m{};
  if (panel.rows.empty()) return m;
  for (const auto& r : panel.rows) {
    for (std::size_t z = 0; z < kZoneCount; ++z) m[z] += r.res[z];
  }
  for (double& v : m) v /= static_cast<double>(panel.size());
  return m;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

std::string_view scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Scale: return "scale";
    case ScenarioKind::SmoothTime: return "smooth_time";
    case ScenarioKind::SmoothTimeSpace: break;
  }
  return "smooth_time_space";
}

std::optional<ScenarioKind> parse_scenario(std::string_view name) {
  if (name == "scale") return ScenarioKind::Scale;
  if (name == "smooth_time") return ScenarioKind::SmoothTime;
  if (name == "smooth_time_space") return ScenarioKind::SmoothTimeSpace;
  return std::nullopt;
}

NetDemandPanel apply_scale(const NetDemandPanel& panel, double factor) {
  check_factor(factor);
  NetDemandPanel out = panel;
  const double extra = factor - 1.0;
  for (auto& r : out.rows) {
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      r.nd[z] -= extra * r.res[z];
      r.nd_fc[z] -= extra * r.res_fc[z];
    }
    recompute_system(r);
  }
  return out;
}

NetDemandPanel apply_smooth_time(const NetDemandPanel& panel, double factor) {
  check_factor(factor);
  NetDemandPanel out = panel;
  const auto m = mean_res(panel);
  const double extra = factor - 1.0;
  for (auto& r : out.rows) {
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      r.nd[z] -= extra * m[z];
      r.nd_fc[z] -= extra * m[z];
    }
    recompute_system(r);
  }
  return out;
}

NetDemandPanel apply_smooth_time_space(const NetDemandPanel& panel, double factor) {
  check_factor(factor);
  NetDemandPanel out = panel;
  const auto m = mean_res(panel);
  std::size_t demand_zones = 0;
  for (Zone z : kZones) demand_zones += is_demand_zone(z) ? 1 : 0;
  const double per_zone = (factor - 1.0) * system_sum(m) / static_cast<double>(demand_zones);
  for (auto& r : out.rows) {
    for (Zone z : kZones) {
      if (!is_demand_zone(z)) continue;
      r.nd[zone_index(z)] -= per_zone;
      r.nd_fc[zone_index(z)] -= per_zone;
    }
    recompute_system(r);
  }
  return out;
}

NetDemandPanel apply_scenario(const NetDemandPanel& panel, ScenarioKind kind, double factor) {
  switch (kind) {
    case ScenarioKind::Scale: return apply_scale(panel, factor);
    case ScenarioKind::SmoothTime: return apply_smooth_time(panel, factor);
    case ScenarioKind::SmoothTimeSpace: break;
  }
  return apply_smooth_time_space(panel, factor);
}

double removed_energy(const NetDemandPanel& baseline, const NetDemandPanel& scenario) {
  if (baseline.size() != scenario.size()) throw ShapeError("panels differ in length");
  double total = 0.0;
  for (std::size_t t = 0; t < baseline.size(); ++t) {
    for (std::size_t z = 0; z < kZoneCount; ++z) total += baseline.rows[t].nd[z] - scenario.rows[t].nd[z];
  }
  return total;
}

ScenarioOutcome run_scenario(const ScenarioSpec& spec, const FeatureSpec& trained_spec, const Scaler& scaler,
                             const DesignPredictor& predict, const NetDemandPanel& panel) {
  if (!(trained_spec == spec.model_spec)) {
    throw SpecError("model feature layout does not match the scenario's required specification");
  }
  const NetDemandPanel base = panel.slice(spec.evaluation_range);
  if (base.rows.empty()) throw DataError(DataError::Kind::Coverage, "panel has no hours in the evaluation range");
  const NetDemandPanel modified = apply_scenario(base, spec.kind, spec.factor);

  const SplitPlan no_folds;
  const DesignMatrix base_design = build_design(base, trained_spec, no_folds, &scaler);
  const DesignMatrix scen_design = build_design(modified, trained_spec, no_folds, &scaler);
  const auto base_pred = predict(base_design);
  const auto scen_pred = predict(scen_design);

  ScenarioOutcome o;
  o.kind = spec.kind;
  o.factor = spec.factor;
  o.range = spec.evaluation_range;
  o.hours = base_pred.size();
  o.mean_baseline_predicted = mean(base_pred);
  o.mean_scenario_predicted = mean(scen_pred);
  o.mean_actual = mean(base_design.y);
  o.delta_eur_per_hour = o.mean_scenario_predicted - o.mean_baseline_predicted;
  o.relative_change_vs_predicted = o.delta_eur_per_hour / o.mean_baseline_predicted;
  o.relative_change_vs_actual = o.delta_eur_per_hour / o.mean_actual;
  o.removed_energy_mwh = removed_energy(base, modified);
  o.smoothing_mean_res = mean_res(base);
  return o;
}

ScenarioOutcome run_scenario(const ScenarioSpec& spec, const MlpModel& model, const NetDemandPanel& panel) {
  return run_scenario(spec, model.spec, model.scaler,
                      [&](const DesignMatrix& d) { return model.predict(d.X); }, panel);
}

RenewableEquivalence renewable_equivalence(double avg_demand_mwh, double avg_res_mwh, double demand_drop) {
  if (avg_res_mwh == 0.0) throw NumericError("average renewable output is zero");
  if (!(avg_res_mwh > 0.0)) throw RangeError("average renewable output must be positive");
  if (!(demand_drop >= 0.0 && demand_drop < 1.0)) throw RangeError("demand drop must lie in [0, 1)");
  RenewableEquivalence r;
  r.factor = 1.0 + demand_drop * avg_demand_mwh / avg_res_mwh;
  r.implied_output_mwh = r.factor * avg_res_mwh;
  return r;
}

nlohmann::json scenario_outcome_to_json(const ScenarioOutcome& o) {
  nlohmann::json means = nlohmann::json::object();
  for (Zone z : kZones) means[std::string(zone_name(z))] = o.smoothing_mean_res[zone_index(z)];
  return {{"kind", scenario_name(o.kind)},
          {"factor", o.factor},
          {"range", {format_date(o.range.first), format_date(o.range.last)}},
          {"hours", o.hours},
          {"mean_baseline_predicted", o.mean_baseline_predicted},
          {"mean_scenario_predicted", o.mean_scenario_predicted},
          {"mean_actual", o.mean_actual},
          {"delta_eur_per_hour", o.delta_eur_per_hour},
          {"relative_change_vs_predicted", o.relative_change_vs_predicted},
          {"relative_change_vs_actual", o.relative_change_vs_actual},
          {"removed_energy_mwh", o.removed_energy_mwh},
          {"smoothing_mean_res_mwh", means}};
}

void write_scenario_table_csv(const std::vector<ScenarioOutcome>& outcomes, std::ostream& out) {
  out << "kind,factor,delta_eur_per_hour,relative_change_vs_predicted,relative_change_vs_actual,removed_energy_mwh\n";
  for (const auto& o : outcomes) {
    out << scenario_name(o.kind) << ',' << csv::format_number(o.factor) << ','
        << csv::format_number(o.delta_eur_per_hour) << ',' << csv::format_number(o.relative_change_vs_predicted)
        << ',' << csv::format_number(o.relative_change_vs_actual) << ',' << csv::format_number(o.removed_energy_mwh)
        << '\n';
  }
}

}  // namespace rdcost

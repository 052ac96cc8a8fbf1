#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rdcost/features.hpp"
#include "rdcost/mlp.hpp"
#include "rdcost/net_demand.hpp"

namespace rdcost {

enum class ScenarioKind : std::uint8_t {
  /// Every zone's wind and solar multiplied by the factor, hour by hour.
  Scale,
  /// The added output arrives as each zone's sample-mean, flat over time.
  SmoothTime,
  /// The added system output spread flat over time and evenly over the six
  /// demand zones.
  SmoothTimeSpace,
};

std::string_view scenario_name(ScenarioKind k);
std::optional<ScenarioKind> parse_scenario(std::string_view name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Scale;
  double factor = 2.0;
  DateRange evaluation_range{make_date(2017, 1, 1), make_date(2020, 3, 7)};
  /// The model must have been trained on exactly this feature layout.
  FeatureSpec model_spec = FeatureSpec::counterfactual();
};

/// nd -= (k-1)*res and nd_fc -= (k-1)*res_fc per zone and hour.
NetDemandPanel apply_scale(const NetDemandPanel& panel, double factor);
/// nd and nd_fc -= (k-1)*mean_t(res_z), constant per zone.
NetDemandPanel apply_smooth_time(const NetDemandPanel& panel, double factor);
/// nd and nd_fc -= (k-1)*mean_t(sum_z res_z)/6 in each demand zone.
NetDemandPanel apply_smooth_time_space(const NetDemandPanel& panel, double factor);
NetDemandPanel apply_scenario(const NetDemandPanel& panel, ScenarioKind kind, double factor);

/// Sum over zones and hours of (baseline nd - scenario nd), MWh.
double removed_energy(const NetDemandPanel& baseline, const NetDemandPanel& scenario);

struct ScenarioOutcome {
  ScenarioKind kind = ScenarioKind::Scale;
  double factor = 1.0;
  DateRange range{};
  std::size_t hours = 0;
  double mean_baseline_predicted = 0.0;
  double mean_scenario_predicted = 0.0;
  double mean_actual = 0.0;
  double delta_eur_per_hour = 0.0;
  double relative_change_vs_predicted = 0.0;
  double relative_change_vs_actual = 0.0;
  double removed_energy_mwh = 0.0;
  ZoneArray<double> smoothing_mean_res{};  // per-zone mean solar+wind over the range
};

/// Predicts standardized design rows, in EUR.
using DesignPredictor = std::function<std::vector<double>(const DesignMatrix&)>;

ScenarioOutcome run_scenario(const ScenarioSpec& spec, const MlpModel& model, const NetDemandPanel& panel);

/// Same with an arbitrary predictor; `scaler` is the one the predictor was
/// trained with.
ScenarioOutcome run_scenario(const ScenarioSpec& spec, const FeatureSpec& trained_spec, const Scaler& scaler,
                             const DesignPredictor& predict, const NetDemandPanel& panel);

struct RenewableEquivalence {
  double factor = 1.0;
  double implied_output_mwh = 0.0;
};

/// Output multiple of wind and solar that offsets `demand_drop` of average
/// demand: factor = 1 + drop * demand / res.
RenewableEquivalence renewable_equivalence(double avg_demand_mwh, double avg_res_mwh, double demand_drop);

nlohmann::json scenario_outcome_to_json(const ScenarioOutcome& o);
/// kind,factor,delta_eur_per_hour,relative_change_vs_predicted,relative_change_vs_actual,removed_energy_mwh
void write_scenario_table_csv(const std::vector<ScenarioOutcome>& outcomes, std::ostream& out);

}  // namespace rdcost

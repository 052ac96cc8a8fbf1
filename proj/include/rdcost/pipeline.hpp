#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rdcost/eval.hpp"
#include "rdcost/features.hpp"
#include "rdcost/linreg.hpp"
#include "rdcost/market_data.hpp"
#include "rdcost/mlp.hpp"
#include "rdcost/net_demand.hpp"
#include "rdcost/scenarios.hpp"
#include "rdcost/splits.hpp"
#include "rdcost/synth.hpp"
#include "rdcost/tuner.hpp"

namespace rdcost {

namespace fs = std::filesystem;

enum class ModelKind : std::uint8_t { Mlp, MlpTuned, Ols };

struct ModelChoice {
  ModelKind kind = ModelKind::Mlp;
  MlpConfig mlp = MlpConfig::reference();
  /// Only for kind == Ols; sets the polynomial degree of the feature spec.
  int ols_degree = 1;
  /// Fit OLS on a seeded random subset of this many training rows.
  std::optional<std::size_t> ols_max_train_rows;
};

struct SplitSettings {
  std::uint64_t seed = 42;
  double ratio = 0.7;
  DateRange in_sample = default_in_sample_range();
  DateRange pre_lockdown = default_pre_lockdown_range();
  DateRange lockdown = default_lockdown_range();
  /// Train and validate on this calendar year only.
  std::optional<int> in_sample_year;
};

struct TunerSettings {
  int R = 81;
  int eta = 3;
  std::uint64_t seed = 0;
  SearchSpace space;
};

struct EvaluateSettings {
  std::string band_window = "pre_lockdown";
  std::size_t histogram_bins = 40;
};

struct ScenarioSettings {
  std::vector<ScenarioKind> kinds = {ScenarioKind::Scale, ScenarioKind::SmoothTime, ScenarioKind::SmoothTimeSpace};
  double factor = 2.0;
  DateRange range{make_date(2017, 1, 1), make_date(2020, 3, 7)};
};

struct RunConfig {
  fs::path zonal = "zonal.csv";
  fs::path national = "national.csv";
  fs::path holidays = "holidays.txt";
  fs::path out = "out";
  IngestConfig ingest;
  SplitSettings split;
  FeatureSpec features = FeatureSpec::preferred();
  ModelChoice model;
  TunerSettings tuner;
  EvaluateSettings evaluate;
  ScenarioSettings scenarios;
  synth::GeneratorConfig synth;
};

/// Relative paths in the document are resolved against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir = {});
nlohmann::json run_config_to_json(const RunConfig& c);
RunConfig load_run_config(const fs::path& path);

/// --seed: replaces the model, tuner and generator seeds. The split seed is
/// part of the research design and stays as configured.
void apply_seed_override(RunConfig& c, std::uint64_t seed);

SplitPlan make_split(const SplitSettings& s);

/// A trained model of either family, as stored in a model file.
struct AnyModel {
  std::variant<MlpModel, OlsModel> model;

  const FeatureSpec& spec() const;
  const Scaler& scaler() const;
  std::vector<double> predict(const Matrix& X) const;
  std::string label() const;
  nlohmann::json to_json() const;
};

AnyModel model_from_json(const nlohmann::json& j);
AnyModel load_model(const fs::path& path);

/// Seeded subset of `rows` (sorted), or all rows when max_rows >= size.
std::vector<std::size_t> subsample_rows(std::span<const std::size_t> rows, std::size_t max_rows, std::uint64_t seed);

struct IngestOutcome {
  IngestReport report;
  std::size_t panel_rows = 0;
};

struct TrainOutcome {
  AnyModel model;
  SplitPlan split;
  std::optional<TunerResult> tuning;
};

struct ScenarioRun {
  std::vector<ScenarioOutcome> outcomes;
  double max_relative_energy_gap = 0.0;
};

/// Each command writes its artifacts plus config.resolved.json into c.out.
IngestOutcome cmd_ingest(const RunConfig& c);
TrainOutcome cmd_train(const RunConfig& c);
TrainOutcome cmd_tune(const RunConfig& c);
EvaluationReport cmd_evaluate(const RunConfig& c, const fs::path& model_path);
ScenarioRun cmd_scenario(const RunConfig& c, const fs::path& model_path);
synth::Generated cmd_synth(const RunConfig& c);

/// Out-of-sample report for a model over the configured windows.
EvaluationReport evaluate_model(const AnyModel& model, const NetDemandPanel& panel, const SplitPlan& split,
                                const EvaluateSettings& settings);

/// Relative tolerance for the equal-energy check across scenarios.
inline constexpr double kEnergyTolerance = 1e-9;

/// Exit codes: 0 success, 1 usage or configuration, 2 data, 3 numeric.
int run_cli(int argc, const char* const* argv, std::ostream& err);

}  // namespace rdcost

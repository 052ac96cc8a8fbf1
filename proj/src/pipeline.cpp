#include "rdcost/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "rdcost/csv.hpp"
#include "rdcost/error.hpp"
#include "rdcost/rng.hpp"

namespace rdcost {
namespace {

nlohmann::json range_json(const DateRange& r) { return {format_date(r.first), format_date(r.last)}; }

DateRange range_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw SpecError(std::string(what) + " must be [first, last]");
  const auto a = parse_date(j[0].get<std::string>());
  const auto b = parse_date(j[1].get<std::string>());
  if (!a || !b) throw SpecError(std::string("malformed date in ") + what);
  if (*b < *a) throw SpecError(std::string(what) + " ends before it starts");
  return {*a, *b};
}

std::string offset_string(int minutes) {
  const int m = minutes < 0 ? -minutes : minutes;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02d:%02d", minutes < 0 ? '-' : '+', m / 60, m % 60);
  return buf;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal();
  return (base / path).lexically_normal();
}

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Mlp: return "mlp";
    case ModelKind::MlpTuned: return "mlp_tuned";
    case ModelKind::Ols: break;
  }
  return "ols";
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError(DataError::Kind::Io, "cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

void prepare_out(const RunConfig& c) {
  fs::create_directories(c.out);
  write_json(c.out / "config.resolved.json", run_config_to_json(c));
}

struct Inputs {
  MarketDataset dataset;
  NetDemandPanel panel;
};

Inputs load_inputs(const RunConfig& c) {
  Inputs in;
  in.dataset = load_dataset(c.zonal, c.national, c.holidays, c.ingest);
  in.panel = build_panel(in.dataset);
  return in;
}

void write_trace_csv(const MlpModel& m, std::ostream& out) {
  out << "epoch,train_mse,validation_mse\n";
  for (const auto& e : m.trace) {
    out << e.epoch << ',' << csv::format_number(e.train_mse) << ',' << csv::format_number(e.validation_mse) << '\n';
  }
}

void write_model_artifacts(const RunConfig& c, const TrainOutcome& t) {
  write_json(c.out / "model.json", t.model.to_json());
  write_json(c.out / "split.json", split_to_json(t.split));
  if (const auto* mlp = std::get_if<MlpModel>(&t.model.model)) {
    auto f = open_out(c.out / "trace.csv");
    write_trace_csv(*mlp, f);
  } else {
    auto f = open_out(c.out / "coefficients.csv");
    write_coefficients_csv(std::get<OlsModel>(t.model.model), f);
  }
}

TrainOutcome tune_impl(const RunConfig& c, const DesignMatrix& design, const SplitPlan& split) {
  TunerOptions opts;
  opts.R = c.tuner.R;
  opts.eta = c.tuner.eta;
  opts.seed = c.tuner.seed;
  opts.base = c.model.mlp;
  opts.final_max_epochs = c.model.mlp.max_epochs;
  TunerResult r = run_hyperband(design, split, c.tuner.space, opts);
  MlpModel final_model = std::move(*r.final_model);
  r.final_model.reset();
  return {AnyModel{std::move(final_model)}, split, std::move(r)};
}

void write_tuning(const RunConfig& c, const TunerResult& r) {
  write_json(c.out / "tuner.json", tuner_result_to_json(r));
  write_json(c.out / "best_config.json", mlp_config_to_json(r.best_config));
  auto f = open_out(c.out / "leaderboard.csv");
  write_leaderboard_csv(r, f);
}

}  // namespace

SplitPlan make_split(const SplitSettings& s) {
  SplitPlan plan = make_split(s.in_sample, s.ratio, s.seed, s.pre_lockdown, s.lockdown);
  if (s.in_sample_year) plan = restrict_in_sample(plan, *s.in_sample_year);
  return plan;
}

// ---- run config -------------------------------------------------------------

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  try {
    RunConfig c;
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      if (p.contains("zonal")) c.zonal = resolve(base_dir, p["zonal"].get<std::string>());
      if (p.contains("national")) c.national = resolve(base_dir, p["national"].get<std::string>());
      if (p.contains("holidays")) c.holidays = resolve(base_dir, p["holidays"].get<std::string>());
      if (p.contains("out")) c.out = resolve(base_dir, p["out"].get<std::string>());
    }
    if (j.contains("ingest")) {
      const auto& k = j["ingest"];
      c.ingest.max_gap = k.value("max_gap", c.ingest.max_gap);
      if (k.contains("utc_offset")) {
        const auto off = parse_utc_offset(k["utc_offset"].get<std::string>());
        if (!off) throw SpecError("malformed utc_offset");
        c.ingest.utc_offset_minutes = *off;
      }
      if (k.contains("winter_months")) {
        c.ingest.winter_months.clear();
        for (const auto& m : k["winter_months"]) {
          const auto v = m.get<unsigned>();
          if (v < 1 || v > 12) throw SpecError("winter month out of range");
          c.ingest.winter_months.insert(v);
        }
      }
      if (k.contains("start") && !k["start"].is_null()) c.ingest.start = parse_date(k["start"].get<std::string>());
      if (k.contains("end") && !k["end"].is_null()) c.ingest.end = parse_date(k["end"].get<std::string>());
    }
    if (j.contains("split")) {
      const auto& k = j["split"];
      c.split.seed = k.value("seed", c.split.seed);
      c.split.ratio = k.value("ratio", c.split.ratio);
      if (k.contains("in_sample")) c.split.in_sample = range_from(k["in_sample"], "split.in_sample");
      if (k.contains("pre_lockdown")) c.split.pre_lockdown = range_from(k["pre_lockdown"], "split.pre_lockdown");
      if (k.contains("lockdown")) c.split.lockdown = range_from(k["lockdown"], "split.lockdown");
      if (k.contains("in_sample_year") && !k["in_sample_year"].is_null()) {
        c.split.in_sample_year = k["in_sample_year"].get<int>();
      }
    }
    if (j.contains("features")) c.features = feature_spec_from_json(j["features"]);
    if (j.contains("model")) {
      const auto& k = j["model"];
      const auto kind = k.value("kind", std::string("mlp"));
      if (kind == "mlp") {
        c.model.kind = ModelKind::Mlp;
      } else if (kind == "mlp_tuned") {
        c.model.kind = ModelKind::MlpTuned;
      } else if (kind == "ols") {
        c.model.kind = ModelKind::Ols;
      } else {
        throw SpecError("unknown model kind '" + kind + "'");
      }
      if (k.contains("mlp")) c.model.mlp = mlp_config_from_json(k["mlp"]);
      c.model.ols_degree = k.value("ols_degree", c.model.ols_degree);
      if (c.model.ols_degree < 1 || c.model.ols_degree > 3) throw SpecError("ols_degree must be 1, 2 or 3");
      if (k.contains("ols_max_train_rows") && !k["ols_max_train_rows"].is_null()) {
        c.model.ols_max_train_rows = k["ols_max_train_rows"].get<std::size_t>();
      }
    }
    if (j.contains("tuner")) {
      const auto& k = j["tuner"];
      c.tuner.R = k.value("R", c.tuner.R);
      c.tuner.eta = k.value("eta", c.tuner.eta);
      c.tuner.seed = k.value("seed", c.tuner.seed);
      if (k.contains("space")) c.tuner.space = search_space_from_json(k["space"]);
    }
    if (j.contains("evaluate")) {
      const auto& k = j["evaluate"];
      c.evaluate.band_window = k.value("band_window", c.evaluate.band_window);
      c.evaluate.histogram_bins = k.value("histogram_bins", c.evaluate.histogram_bins);
    }
    if (j.contains("scenarios")) {
      const auto& k = j["scenarios"];
      if (k.contains("kinds")) {
        c.scenarios.kinds.clear();
        for (const auto& s : k["kinds"]) {
          const auto kind = parse_scenario(s.get<std::string>());
          if (!kind) throw SpecError("unknown scenario '" + s.get<std::string>() + "'");
          c.scenarios.kinds.push_back(*kind);
        }
      }
      c.scenarios.factor = k.value("factor", c.scenarios.factor);
      if (k.contains("range")) c.scenarios.range = range_from(k["range"], "scenarios.range");
    }
    if (j.contains("synth")) c.synth = synth::config_from_json(j["synth"]);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("bad run configuration: ") + e.what());
  }
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["paths"] = {{"zonal", c.zonal.generic_string()},
                {"national", c.national.generic_string()},
                {"holidays", c.holidays.generic_string()},
                {"out", c.out.generic_string()}};
  j["ingest"] = {{"max_gap", c.ingest.max_gap},
                 {"utc_offset", offset_string(c.ingest.utc_offset_minutes)},
                 {"winter_months", std::vector<unsigned>(c.ingest.winter_months.begin(), c.ingest.winter_months.end())},
                 {"start", c.ingest.start ? nlohmann::json(format_date(*c.ingest.start)) : nlohmann::json()},
                 {"end", c.ingest.end ? nlohmann::json(format_date(*c.ingest.end)) : nlohmann::json()}};
  j["split"] = {{"seed", c.split.seed},
                {"ratio", c.split.ratio},
                {"in_sample", range_json(c.split.in_sample)},
                {"pre_lockdown", range_json(c.split.pre_lockdown)},
                {"lockdown", range_json(c.split.lockdown)},
                {"in_sample_year", c.split.in_sample_year ? nlohmann::json(*c.split.in_sample_year) : nlohmann::json()}};
  j["features"] = feature_spec_to_json(c.features);
  j["model"] = {{"kind", model_kind_name(c.model.kind)},
                {"mlp", mlp_config_to_json(c.model.mlp)},
                {"ols_degree", c.model.ols_degree},
                {"ols_max_train_rows",
                 c.model.ols_max_train_rows ? nlohmann::json(*c.model.ols_max_train_rows) : nlohmann::json()}};
  j["tuner"] = {{"R", c.tuner.R}, {"eta", c.tuner.eta}, {"seed", c.tuner.seed},
                {"space", search_space_to_json(c.tuner.space)}};
  j["evaluate"] = {{"band_window", c.evaluate.band_window},
                   {"histogram_bins", c.evaluate.histogram_bins},
                   {"quantile_method", kQuantileMethod}};
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : c.scenarios.kinds) kinds.push_back(scenario_name(k));
  j["scenarios"] = {{"kinds", kinds}, {"factor", c.scenarios.factor}, {"range", range_json(c.scenarios.range)}};
  j["synth"] = synth::config_to_json(c.synth);
  return j;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(DataError::Kind::Io, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

void apply_seed_override(RunConfig& c, std::uint64_t seed) {
  c.model.mlp.seed = seed;
  c.tuner.seed = seed;
  c.synth.seed = seed;
}

// ---- models -----------------------------------------------------------------

const FeatureSpec& AnyModel::spec() const {
  return std::visit([](const auto& m) -> const FeatureSpec& { return m.spec; }, model);
}

const Scaler& AnyModel::scaler() const {
  return std::visit([](const auto& m) -> const Scaler& { return m.scaler; }, model);
}

std::vector<double> AnyModel::predict(const Matrix& X) const {
  return std::visit([&](const auto& m) { return m.predict(X); }, model);
}

std::string AnyModel::label() const {
  if (const auto* m = std::get_if<MlpModel>(&model)) {
    return "mlp(" + std::to_string(m->config.n1) + "x" + std::to_string(m->config.n2) + "," +
           std::string(activation_name(m->config.activation)) + ")";
  }
  return "ols(degree " + std::to_string(std::get<OlsModel>(model).spec.poly_degree) + ")";
}

nlohmann::json AnyModel::to_json() const {
  if (const auto* m = std::get_if<MlpModel>(&model)) return mlp_to_json(*m);
  return ols_to_json(std::get<OlsModel>(model));
}

AnyModel model_from_json(const nlohmann::json& j) {
  const auto kind = j.value("kind", std::string());
  if (kind == "mlp") return {mlp_from_json(j)};
  if (kind == "ols") return {ols_from_json(j)};
  throw SpecError("model document has unknown kind '" + kind + "'");
}

AnyModel load_model(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(DataError::Kind::Io, "cannot read model " + path.string());
  try {
    return model_from_json(nlohmann::json::parse(f));
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
}

std::vector<std::size_t> subsample_rows(std::span<const std::size_t> rows, std::size_t max_rows, std::uint64_t seed) {
  std::vector<std::size_t> out(rows.begin(), rows.end());
  if (max_rows >= out.size()) return out;
  Rng rng(seed);
  rng.shuffle(out.begin(), out.end());
  out.resize(max_rows);
  std::sort(out.begin(), out.end());
  return out;
}

// ---- commands ---------------------------------------------------------------

IngestOutcome cmd_ingest(const RunConfig& c) {
  const Inputs in = load_inputs(c);
  prepare_out(c);
  {
    auto f = open_out(c.out / "panel.csv");
    write_panel_csv(in.panel, f);
  }
  const auto& r = in.dataset.report;
  write_json(c.out / "ingest_report.json", {{"hours", r.hours},
                                            {"expected_hours", r.expected_hours},
                                            {"panel_rows", in.panel.size()},
                                            {"interpolated_zonal_cells", r.interpolated_zonal_cells},
                                            {"interpolated_national_cells", r.interpolated_national_cells},
                                            {"interpolated_gas_days", r.interpolated_gas_days},
                                            {"interpolated_total", r.interpolated_total()},
                                            {"warnings", r.warnings}});
  return {r, in.panel.size()};
}

TrainOutcome cmd_train(const RunConfig& c) {
  if (c.model.kind == ModelKind::MlpTuned) return cmd_tune(c);
  const Inputs in = load_inputs(c);
  const SplitPlan split = make_split(c.split);
  FeatureSpec spec = c.features;
  if (c.model.kind == ModelKind::Ols) spec.poly_degree = c.model.ols_degree;
  const DesignMatrix design = build_design(in.panel, spec, split);

  TrainOutcome t{AnyModel{MlpModel{}}, split, std::nullopt};
  if (c.model.kind == ModelKind::Ols) {
    auto rows = design.rows_in({Fold::Train});
    if (c.model.ols_max_train_rows) rows = subsample_rows(rows, *c.model.ols_max_train_rows, c.split.seed);
    t.model.model = fit_ols(design, rows);
  } else {
    t.model.model = train(design, split, c.model.mlp);
  }
  prepare_out(c);
  write_model_artifacts(c, t);
  return t;
}

TrainOutcome cmd_tune(const RunConfig& c) {
  const Inputs in = load_inputs(c);
  const SplitPlan split = make_split(c.split);
  const DesignMatrix design = build_design(in.panel, c.features, split);
  TrainOutcome t = tune_impl(c, design, split);
  prepare_out(c);
  write_model_artifacts(c, t);
  write_tuning(c, *t.tuning);
  return t;
}

EvaluationReport evaluate_model(const AnyModel& model, const NetDemandPanel& panel, const SplitPlan& split,
                                const EvaluateSettings& settings) {
  const DesignMatrix design = build_design(panel, model.spec(), split, &model.scaler());
  const auto rows = design.rows_in({Fold::PreLockdown, Fold::Lockdown});
  const auto pred = model.predict(design.X);
  std::vector<Hour> hours;
  std::vector<Date> dates;
  std::vector<double> actual;
  std::vector<double> predicted;
  for (std::size_t i : rows) {
    hours.push_back(design.hours[i]);
    dates.push_back(design.dates[i]);
    actual.push_back(design.y[i]);
    predicted.push_back(pred[i]);
  }
  const std::vector<NamedWindow> windows = {{"pre_lockdown", split.oos_pre_lockdown}, {"lockdown", split.oos_lockdown}};
  EvaluationReport rep = summarize_windows(hours, dates, actual, predicted, windows, settings.band_window);
  rep.model_label = model.label();
  return rep;
}

EvaluationReport cmd_evaluate(const RunConfig& c, const fs::path& model_path) {
  const AnyModel model = load_model(model_path);
  const Inputs in = load_inputs(c);
  const EvaluationReport rep = evaluate_model(model, in.panel, make_split(c.split), c.evaluate);
  prepare_out(c);
  write_json(c.out / "evaluation.json", report_to_json(rep));
  {
    auto f = open_out(c.out / "hourly.csv");
    write_hourly_csv(rep, f);
  }
  {
    auto f = open_out(c.out / "daily.csv");
    write_daily_csv(rep, f);
  }
  {
    auto f = open_out(c.out / "error_histogram.csv");
    write_error_histogram_csv(rep, c.evaluate.histogram_bins, f);
  }
  return rep;
}

ScenarioRun cmd_scenario(const RunConfig& c, const fs::path& model_path) {
  const AnyModel model = load_model(model_path);
  const Inputs in = load_inputs(c);
  ScenarioRun run;
  for (ScenarioKind kind : c.scenarios.kinds) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.factor = c.scenarios.factor;
    spec.evaluation_range = c.scenarios.range;
    run.outcomes.push_back(run_scenario(spec, model.spec(), model.scaler(),
                                        [&](const DesignMatrix& d) { return model.predict(d.X); }, in.panel));
  }
  if (!run.outcomes.empty()) {
    const double ref = run.outcomes.front().removed_energy_mwh;
    for (const auto& o : run.outcomes) {
      const double scale = std::max(std::abs(ref), 1.0);
      run.max_relative_energy_gap = std::max(run.max_relative_energy_gap, std::abs(o.removed_energy_mwh - ref) / scale);
    }
  }
  prepare_out(c);
  nlohmann::json outcomes = nlohmann::json::array();
  for (const auto& o : run.outcomes) outcomes.push_back(scenario_outcome_to_json(o));
  write_json(c.out / "scenarios.json", {{"model", model.label()},
                                        {"outcomes", outcomes},
                                        {"energy_check",
                                         {{"max_relative_gap", run.max_relative_energy_gap},
                                          {"tolerance", kEnergyTolerance},
                                          {"ok", run.max_relative_energy_gap <= kEnergyTolerance}}}});
  {
    auto f = open_out(c.out / "scenarios.csv");
    write_scenario_table_csv(run.outcomes, f);
  }
  if (run.max_relative_energy_gap > kEnergyTolerance) {
    throw NumericError("scenarios remove different amounts of energy (relative gap " +
                       csv::format_number(run.max_relative_energy_gap) + ")");
  }
  return run;
}

synth::Generated cmd_synth(const RunConfig& c) {
  synth::Generated g = synth::generate(c.synth);
  prepare_out(c);
  synth::write_files(g, c.out);
  auto f = open_out(c.out / "truth.csv");
  f << "timestamp,nd_system,nd_fc_system,workday,cost_multiplier,noiseless_cost\n";
  const auto& t = g.truth;
  for (std::size_t i = 0; i < t.hours.size(); ++i) {
    f << format_timestamp(t.hours[i]) << ',' << csv::format_number(t.nd_system[i]) << ','
      << csv::format_number(t.nd_fc_system[i]) << ',' << (t.workday[i] ? 1 : 0) << ','
      << csv::format_number(t.cost_multiplier[i]) << ',' << csv::format_number(t.noiseless_cost[i]) << '\n';
  }
  return g;
}

// ---- CLI --------------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& err) {
  CLI::App app{"Counterfactual re-dispatch cost pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string model_path;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--seed", seed, "overrides the model, tuner and generator seeds");
  app.add_option("--out", out_dir, "output directory");
  app.fallthrough();
  auto* ingest = app.add_subcommand("ingest", "load, gap-fill and write the net-demand panel");
  auto* trainc = app.add_subcommand("train", "fit the configured model");
  auto* tune = app.add_subcommand("tune", "hyperband search, then retrain the winner");
  auto* evaluate = app.add_subcommand("evaluate", "out-of-sample report for a model file");
  auto* scenario = app.add_subcommand("scenario", "renewable counterfactuals for a model file");
  auto* synthc = app.add_subcommand("synth", "write a synthetic dataset");
  for (auto* sub : {evaluate, scenario}) sub->add_option("--model", model_path, "model file (default <out>/model.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out;
    const int code = app.exit(e, out, err);
    if (code == 0) {
      err << out.str();
      return 0;
    }
    return 1;
  }

  try {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) apply_seed_override(c, *seed);
    if (!out_dir.empty()) c.out = out_dir;
    const fs::path model_file = model_path.empty() ? c.out / "model.json" : fs::path(model_path);

    if (ingest->parsed()) {
      const auto r = cmd_ingest(c);
      for (const auto& w : r.report.warnings) err << "warning: " << w << '\n';
      err << "panel rows: " << r.panel_rows << " (expected " << r.report.expected_hours
          << "), interpolated cells: " << r.report.interpolated_total() << '\n';
    } else if (trainc->parsed()) {
      const auto t = cmd_train(c);
      if (const auto* m = std::get_if<MlpModel>(&t.model.model)) {
        err << "trained " << t.model.label() << ": best epoch " << m->best_epoch << " of " << m->trace.size() << '\n';
      } else {
        err << "fitted " << t.model.label() << '\n';
      }
    } else if (tune->parsed()) {
      const auto t = cmd_tune(c);
      err << "tuned " << t.tuning->leaderboard.size() << " trials, best validation MSE "
          << csv::format_number(t.tuning->best_validation_mse) << '\n';
    } else if (evaluate->parsed()) {
      const auto rep = cmd_evaluate(c, model_file);
      for (const auto& w : rep.windows) {
        err << w.name << ": rmse " << csv::format_number(w.rmse) << ", actual/predicted - 1 "
            << csv::format_number(w.ratio_actual_over_predicted);
        if (w.wilcoxon) err << ", wilcoxon p " << csv::format_number(w.wilcoxon->p);
        err << '\n';
      }
    } else if (scenario->parsed()) {
      const auto run = cmd_scenario(c, model_file);
      err << "energy check: max relative gap " << csv::format_number(run.max_relative_energy_gap) << " (tolerance "
          << csv::format_number(kEnergyTolerance) << ") ok\n";
    } else if (synthc->parsed()) {
      const auto g = cmd_synth(c);
      err << "wrote " << g.dataset.size() << " hours to " << c.out.string() << '\n';
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.category()) {
      case Error::Category::Data:
      case Error::Category::Shape: return 2;
      case Error::Category::Numeric: return 3;
      case Error::Category::Spec:
      case Error::Category::Range: break;
    }
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace rdcost

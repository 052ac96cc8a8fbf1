#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "rdcost/mlp.hpp"
#include "rdcost/rng.hpp"

namespace rdcost {

struct SearchSpace {
  std::vector<Activation> activations = {Activation::ReLU, Activation::Tanh, Activation::Sigmoid};
  double lr_min = 1e-4;
  double lr_max = 1e-2;
  std::vector<double> dropouts = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::size_t> n1 = {16, 32, 48};
  std::vector<std::size_t> n2 = {16, 32, 48};

  bool is_singleton() const;
};

/// Uniform over the discrete sets, log10-uniform over the learning rate.
/// Fields outside the space are copied from `base`.
MlpConfig sample_config(const SearchSpace& space, Rng& rng, const MlpConfig& base = {});

struct Rung {
  std::size_t configs = 0;
  int budget = 0;  // epochs per trial
};

struct BracketPlan {
  int s = 0;
  std::vector<Rung> rungs;
};

/// Brackets s = s_max..0 with s_max = floor(log_eta R). Bracket s starts
/// ceil((s_max+1) eta^s / (s+1)) configurations at R eta^-s epochs; each
/// rung keeps the best floor(n_i / eta).
std::vector<BracketPlan> hyperband_schedule(int R, int eta);

struct TrialRecord {
  int bracket = 0;
  int rung = 0;
  std::size_t sample_index = 0;
  MlpConfig config;
  int budget = 0;
  double validation_mse = 0.0;
};

struct TunerResult {
  MlpConfig best_config;
  double best_validation_mse = 0.0;
  std::vector<TrialRecord> leaderboard;
  std::vector<BracketPlan> brackets;
  int R = 0;
  int eta = 0;
  std::uint64_t seed = 0;
  long long total_epochs = 0;  // sum of allotted trial budgets
  std::optional<MlpModel> final_model;
};

struct TunerOptions {
  int R = 81;
  int eta = 3;
  std::uint64_t seed = 0;
  /// Template for fields the search space does not cover.
  MlpConfig base = MlpConfig::reference();
  /// Run the trials of a rung concurrently.
  bool parallel_trials = true;
  int final_max_epochs = 1500;
};

/// Returns the validation MSE of `config` trained for `budget` epochs. Must
/// be safe to call concurrently.
using TrialFn = std::function<double(const MlpConfig& config, int budget)>;

/// Schedule only; no final retraining.
TunerResult run_hyperband(const TrialFn& trial, const SearchSpace& space, const TunerOptions& options);

/// Trains MLP trials on the design, then retrains the winner with the full
/// early-stopping budget into `final_model`.
TunerResult run_hyperband(const DesignMatrix& design, const SplitPlan& split, const SearchSpace& space,
                          const TunerOptions& options);

nlohmann::json search_space_to_json(const SearchSpace& s);
SearchSpace search_space_from_json(const nlohmann::json& j);
nlohmann::json tuner_result_to_json(const TunerResult& r);
/// bracket,rung,sample,activation,learning_rate,dropout,n1,n2,budget,validation_mse
void write_leaderboard_csv(const TunerResult& r, std::ostream& out);

}  // namespace rdcost

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdcost/features.hpp"
#include "rdcost/matrix.hpp"
#include "rdcost/splits.hpp"

namespace rdcost {

/// Identity exists for closed-form gradient tests; the tuner never samples it.
enum class Activation : std::uint8_t { ReLU, Tanh, Sigmoid, Identity };

std::string_view activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

enum class StoppingRule : std::uint8_t {
  /// Stop after `patience` consecutive epochs without beating the best
  /// validation MSE seen so far.
  BestSoFar,
  /// Stop after `patience` consecutive epoch-over-epoch increases.
  EpochOverEpoch,
};

struct MlpConfig {
  std::size_t n1 = 48;
  std::size_t n2 = 48;
  Activation activation = Activation::ReLU;
  double dropout = 0.1;
  double learning_rate = 0.006161;
  int max_epochs = 1500;
  int patience = 5;
  /// 0 selects full-batch training.
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-7;
  StoppingRule stopping = StoppingRule::BestSoFar;
  /// Train on a standardized target. Off by default: losses stay in EUR^2.
  bool target_scaling = false;

  /// Known-good tuned optimum for the preferred layout.
  static MlpConfig reference() { return {}; }

  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

/// Offsets of each parameter block inside the flat parameter vector:
/// W1 (n1 x d, row-major), b1, W2 (n2 x n1), b2, w3 (n2), b3.
struct Layout {
  std::size_t d = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  std::size_t w1() const { return 0; }
  std::size_t b1() const { return n1 * d; }
  std::size_t w2() const { return b1() + n1; }
  std::size_t b2() const { return w2() + n2 * n1; }
  std::size_t w3() const { return b2() + n2; }
  std::size_t b3() const { return w3() + n2; }
  std::size_t size() const { return b3() + 1; }

  friend bool operator==(const Layout&, const Layout&) = default;
};

/// (d+1)*n1 + (n1+1)*n2 + (n2+1).
constexpr std::size_t parameter_count(std::size_t d, std::size_t n1, std::size_t n2) {
  return (d + 1) * n1 + (n1 + 1) * n2 + (n2 + 1);
}

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
};

struct MlpModel {
  MlpConfig config;
  Layout layout;
  std::vector<double> params;
  FeatureSpec spec;
  std::vector<std::string> column_names;
  Scaler scaler;
  double target_mean = 0.0;
  double target_scale = 1.0;
  std::vector<EpochRecord> trace;
  int best_epoch = 0;

  /// Deterministic inference (no dropout), in EUR. `x` is a standardized row.
  double predict(std::span<const double> x) const;
  /// Row-parallel inference over a standardized matrix.
  std::vector<double> predict(const Matrix& X) const;
  std::vector<double> predict(const Matrix& X, std::span<const std::size_t> rows) const;
};

/// Model with freshly initialized weights: He-uniform for ReLU layers,
/// Glorot-uniform otherwise, zero biases.
MlpModel init_model(std::size_t input_dim, const MlpConfig& config);

/// Flat gradient of the batch-mean squared error. `masks1`/`masks2` hold one
/// row of inverted-dropout multipliers per batch row, or are empty for no
/// dropout. Uses the OpenMP blocked kernel.
std::vector<double> batch_gradient(const MlpModel& model, const Matrix& X, std::span<const std::size_t> rows,
                                   std::span<const double> targets, std::span<const double> masks1,
                                   std::span<const double> masks2);

/// s <- decay*s + (1-decay)*g^2;  theta <- theta - lr*g/(sqrt(s)+epsilon).
/// Throws NumericError on a non-finite gradient.
void rmsprop_step(std::span<double> params, std::span<const double> grads, std::span<double> state, double lr,
                  double decay, double epsilon);

/// Patience bookkeeping, one observation per epoch (epochs count from 1).
class EarlyStopping {
 public:
  EarlyStopping(int patience, StoppingRule rule) : patience_(patience), rule_(rule) {}

  /// Records the epoch's validation loss; returns true if it is a new best.
  bool observe(double loss);
  bool should_stop() const { return bad_epochs_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  StoppingRule rule_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int bad_epochs_ = 0;
  double best_loss_ = 0.0;
  double last_loss_ = 0.0;
};

/// Test and instrumentation hooks for train().
struct TrainHooks {
  /// Replaces the computed validation MSE of an epoch.
  std::function<double(int epoch, double computed)> validation_override;
  /// Called after each epoch with the current (not best) parameters.
  std::function<void(int epoch, std::span<const double> params)> on_epoch_end;
  /// Keep every unit (multiplier 1) instead of sampling dropout masks.
  bool force_all_ones_mask = false;
};

/// RMSProp on shuffled mini-batches with early stopping on validation MSE.
/// Train and validation rows are the design rows whose dates the plan puts
/// in those folds. Returns the best-epoch weights.
MlpModel train(const DesignMatrix& design, const SplitPlan& split, const MlpConfig& config,
               const TrainHooks& hooks = {});

nlohmann::json mlp_config_to_json(const MlpConfig& c);
MlpConfig mlp_config_from_json(const nlohmann::json& j);
nlohmann::json mlp_to_json(const MlpModel& m);
MlpModel mlp_from_json(const nlohmann::json& j);

}  // namespace rdcost

#include "rdcost/mlp.hpp"

#include <cmath>
#include <numeric>

#include "rdcost/error.hpp"
#include "rdcost/mlp_kernels.hpp"
#include "rdcost/rng.hpp"

namespace rdcost {
namespace {

constexpr const char* kModelFormat = "rdcost.mlp/1";

void validate(const MlpConfig& c) {
  if (c.n1 == 0 || c.n2 == 0) throw SpecError("hidden layers need at least one neuron");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw SpecError("dropout must lie in [0, 1)");
  if (!(c.learning_rate > 0.0)) throw SpecError("learning rate must be positive");
  if (c.max_epochs < 1) throw SpecError("max_epochs must be at least 1");
  if (c.patience < 1) throw SpecError("patience must be at least 1");
  if (!(c.rmsprop_decay >= 0.0 && c.rmsprop_decay < 1.0)) throw SpecError("rmsprop decay must lie in [0, 1)");
  if (!(c.rmsprop_epsilon >= 0.0)) throw SpecError("rmsprop epsilon must be non-negative");
}

void fill_uniform(Rng& rng, std::span<double> w, double limit) {
  for (double& v : w) v = rng.uniform(-limit, limit);
}

double init_limit(Activation a, std::size_t fan_in, std::size_t fan_out) {
  if (a == Activation::ReLU) return std::sqrt(6.0 / static_cast<double>(fan_in));
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: break;
  }
  return "identity";
}

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "relu" || name == "ReLU") return Activation::ReLU;
  if (name == "tanh" || name == "Tanh") return Activation::Tanh;
  if (name == "sigmoid" || name == "Sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  return std::nullopt;
}

double MlpModel::predict(std::span<const double> x) const {
  if (x.size() != layout.d) throw ShapeError("feature row has " + std::to_string(x.size()) + " columns, model expects " +
                                            std::to_string(layout.d));
  kernels::Workspace<double> ws(layout);
  const double raw = kernels::forward(layout, params.data(), config.activation, x.data(),
                                      static_cast<const double*>(nullptr), static_cast<const double*>(nullptr), ws);
  return raw * target_scale + target_mean;
}

std::vector<double> MlpModel::predict(const Matrix& X, std::span<const std::size_t> rows) const {
  if (X.cols() != layout.d) throw ShapeError("design width does not match the model input dimension");
  std::vector<double> out(rows.size());
  kernels::parallel::predict(layout, params, config.activation, X, rows, out);
  for (double& v : out) v = v * target_scale + target_mean;
  return out;
}

std::vector<double> MlpModel::predict(const Matrix& X) const {
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return predict(X, rows);
}

MlpModel init_model(std::size_t input_dim, const MlpConfig& config) {
  validate(config);
  if (input_dim == 0) throw ShapeError("input dimension must be positive");
  MlpModel m;
  m.config = config;
  m.layout = {input_dim, config.n1, config.n2};
  m.params.assign(m.layout.size(), 0.0);
  Rng rng(derive_seed(config.seed, 0));
  const auto& l = m.layout;
  std::span<double> p(m.params);
  fill_uniform(rng, p.subspan(l.w1(), l.n1 * l.d), init_limit(config.activation, l.d, l.n1));
  fill_uniform(rng, p.subspan(l.w2(), l.n2 * l.n1), init_limit(config.activation, l.n1, l.n2));
  // linear output unit: Glorot
  fill_uniform(rng, p.subspan(l.w3(), l.n2), std::sqrt(6.0 / static_cast<double>(l.n2 + 1)));
  return m;
}

std::vector<double> batch_gradient(const MlpModel& model, const Matrix& X, std::span<const std::size_t> rows,
                                   std::span<const double> targets, std::span<const double> masks1,
                                   std::span<const double> masks2) {
  std::vector<double> grad(model.layout.size());
  kernels::parallel::batch_gradient(model.layout, model.params, model.config.activation, X, rows, targets, masks1,
                                    masks2, grad);
  return grad;
}

void rmsprop_step(std::span<double> params, std::span<const double> grads, std::span<double> state, double lr,
                  double decay, double epsilon) {
  if (params.size() != grads.size() || params.size() != state.size()) throw ShapeError("rmsprop shape mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) throw NumericError("non-finite gradient at parameter " + std::to_string(i));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state[i] = decay * state[i] + (1.0 - decay) * g * g;
    const double denom = std::sqrt(state[i]) + epsilon;
    if (denom > 0.0) params[i] -= lr * g / denom;
  }
}

bool EarlyStopping::observe(double loss) {
  ++epoch_;
  const bool improved = epoch_ == 1 || loss < best_loss_;
  if (improved) {
    best_loss_ = loss;
    best_epoch_ = epoch_;
  }
  if (rule_ == StoppingRule::BestSoFar) {
    bad_epochs_ = improved ? 0 : bad_epochs_ + 1;
  } else {
    bad_epochs_ = (epoch_ > 1 && loss > last_loss_) ? bad_epochs_ + 1 : 0;
  }
  last_loss_ = loss;
  return improved;
}

MlpModel train(const DesignMatrix& design, const SplitPlan& split, const MlpConfig& config, const TrainHooks& hooks) {
  validate(config);
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  for (std::size_t i = 0; i < design.rows(); ++i) {
    const Fold f = split.fold_of(design.dates[i]);
    if (f == Fold::Train) train_rows.push_back(i);
    if (f == Fold::Validation) val_rows.push_back(i);
  }
  if (train_rows.empty() || val_rows.empty()) throw RangeError("training and validation rows must be non-empty");

  MlpModel model = init_model(design.cols(), config);
  model.spec = design.spec;
  model.column_names = design.column_names;
  model.scaler = design.scaler;

  // Output bias starts at the training mean of the (possibly scaled) target.
  double y_mean = 0.0;
  for (std::size_t r : train_rows) y_mean += design.y[r];
  y_mean /= static_cast<double>(train_rows.size());
  if (config.target_scaling) {
    double ss = 0.0;
    for (std::size_t r : train_rows) ss += (design.y[r] - y_mean) * (design.y[r] - y_mean);
    const double sd = std::sqrt(ss / static_cast<double>(train_rows.size()));
    model.target_mean = y_mean;
    model.target_scale = sd > 0.0 ? sd : 1.0;
  } else {
    model.params[model.layout.b3()] = y_mean;
  }
  std::vector<double> target(design.rows());
  for (std::size_t i = 0; i < design.rows(); ++i) target[i] = (design.y[i] - model.target_mean) / model.target_scale;
  const double loss_scale = model.target_scale * model.target_scale;

  const auto& l = model.layout;
  const std::size_t n_train = train_rows.size();
  const std::size_t batch = config.batch_size == 0 ? n_train : std::min(config.batch_size, n_train);
  const bool use_masks = config.dropout > 0.0 || hooks.force_all_ones_mask;
  const double keep_scale = 1.0 / (1.0 - config.dropout);

  Rng shuffle_rng(derive_seed(config.seed, 1));
  Rng mask_rng(derive_seed(config.seed, 2));
  std::vector<double> state(l.size(), 0.0);
  std::vector<double> grad(l.size(), 0.0);
  std::vector<double> best_params = model.params;
  std::vector<double> batch_targets;
  std::vector<double> masks1;
  std::vector<double> masks2;
  std::vector<double> val_pred(val_rows.size());
  EarlyStopping stopper(config.patience, config.stopping);
  std::vector<std::size_t> order = train_rows;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double sse = 0.0;
    for (std::size_t lo = 0; lo < n_train; lo += batch) {
      const std::size_t hi = std::min(lo + batch, n_train);
      const std::span<const std::size_t> rows(order.data() + lo, hi - lo);
      batch_targets.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) batch_targets[i] = target[rows[i]];
      masks1.clear();
      masks2.clear();
      if (use_masks) {
        masks1.resize(rows.size() * l.n1);
        masks2.resize(rows.size() * l.n2);
        auto draw = [&](std::vector<double>& m) {
          for (double& v : m) {
            if (hooks.force_all_ones_mask) {
              v = 1.0;
            } else {
              v = mask_rng.uniform() < config.dropout ? 0.0 : keep_scale;
            }
          }
        };
        draw(masks1);
        draw(masks2);
      }
      const double loss = kernels::parallel::batch_gradient(l, model.params, config.activation, design.X, rows,
                                                            batch_targets, masks1, masks2, grad);
      rmsprop_step(model.params, grad, state, config.learning_rate, config.rmsprop_decay, config.rmsprop_epsilon);
      sse += loss * static_cast<double>(rows.size());
    }

    kernels::parallel::predict(l, model.params, config.activation, design.X, val_rows, val_pred);
    double val_sse = 0.0;
    for (std::size_t i = 0; i < val_rows.size(); ++i) {
      const double r = val_pred[i] - target[val_rows[i]];
      val_sse += r * r;
    }
    double val_mse = val_sse / static_cast<double>(val_rows.size()) * loss_scale;
    if (hooks.validation_override) val_mse = hooks.validation_override(epoch, val_mse);
    if (!std::isfinite(val_mse)) {
      throw NumericError("validation MSE became non-finite at epoch " + std::to_string(epoch));
    }
    model.trace.push_back({epoch, sse / static_cast<double>(n_train) * loss_scale, val_mse});
    if (stopper.observe(val_mse)) best_params = model.params;
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, model.params);
    if (stopper.should_stop()) break;
  }
  model.params = std::move(best_params);
  model.best_epoch = stopper.best_epoch();
  return model;
}

nlohmann::json mlp_config_to_json(const MlpConfig& c) {
  return {{"n1", c.n1},
          {"n2", c.n2},
          {"activation", activation_name(c.activation)},
          {"dropout", c.dropout},
          {"learning_rate", c.learning_rate},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"rmsprop_decay", c.rmsprop_decay},
          {"rmsprop_epsilon", c.rmsprop_epsilon},
          {"stopping", c.stopping == StoppingRule::BestSoFar ? "best_so_far" : "epoch_over_epoch"},
          {"target_scaling", c.target_scaling}};
}

MlpConfig mlp_config_from_json(const nlohmann::json& j) {
  MlpConfig c;
  c.n1 = j.value("n1", c.n1);
  c.n2 = j.value("n2", c.n2);
  const auto act = parse_activation(j.value("activation", std::string("relu")));
  if (!act) throw SpecError("unknown activation");
  c.activation = *act;
  c.dropout = j.value("dropout", c.dropout);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.rmsprop_decay = j.value("rmsprop_decay", c.rmsprop_decay);
  c.rmsprop_epsilon = j.value("rmsprop_epsilon", c.rmsprop_epsilon);
  const auto stopping = j.value("stopping", std::string("best_so_far"));
  if (stopping == "best_so_far") {
    c.stopping = StoppingRule::BestSoFar;
  } else if (stopping == "epoch_over_epoch") {
    c.stopping = StoppingRule::EpochOverEpoch;
  } else {
    throw SpecError("unknown stopping rule '" + stopping + "'");
  }
  c.target_scaling = j.value("target_scaling", c.target_scaling);
  validate(c);
  return c;
}

nlohmann::json mlp_to_json(const MlpModel& m) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : m.trace) trace.push_back({e.epoch, e.train_mse, e.validation_mse});
  return {{"format", kModelFormat},
          {"kind", "mlp"},
          {"config", mlp_config_to_json(m.config)},
          {"layout", {{"d", m.layout.d}, {"n1", m.layout.n1}, {"n2", m.layout.n2}}},
          {"feature_spec", feature_spec_to_json(m.spec)},
          {"columns", m.column_names},
          {"scaler", scaler_to_json(m.scaler)},
          {"target", {{"mean", m.target_mean}, {"scale", m.target_scale}}},
          {"params", m.params},
          {"best_epoch", m.best_epoch},
          {"trace", trace}};
}

MlpModel mlp_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != kModelFormat) throw SpecError("not an rdcost MLP model document");
  MlpModel m;
  m.config = mlp_config_from_json(j.at("config"));
  const auto& lj = j.at("layout");
  m.layout = {lj.at("d").get<std::size_t>(), lj.at("n1").get<std::size_t>(), lj.at("n2").get<std::size_t>()};
  m.spec = feature_spec_from_json(j.at("feature_spec"));
  m.column_names = j.at("columns").get<std::vector<std::string>>();
  m.scaler = scaler_from_json(j.at("scaler"));
  m.target_mean = j.at("target").at("mean").get<double>();
  m.target_scale = j.at("target").at("scale").get<double>();
  m.params = j.at("params").get<std::vector<double>>();
  m.best_epoch = j.value("best_epoch", 0);
  for (const auto& e : j.value("trace", nlohmann::json::array())) {
    m.trace.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
  }
  if (m.params.size() != m.layout.size()) throw ShapeError("parameter count does not match the layout");
  if (m.column_names.size() != m.layout.d || m.scaler.size() != m.layout.d) {
    throw ShapeError("column metadata does not match the input dimension");
  }
  return m;
}

}  // namespace rdcost

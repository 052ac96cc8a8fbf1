#include "rdcost/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>

#include "rdcost/csv.hpp"
#include "rdcost/error.hpp"

namespace rdcost {
namespace {

long long ipow(long long base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void validate(const SearchSpace& s) {
  if (s.activations.empty() || s.dropouts.empty() || s.n1.empty() || s.n2.empty()) {
    throw SpecError("search space has an empty dimension");
  }
  if (!(s.lr_min > 0.0 && s.lr_min <= s.lr_max)) throw SpecError("learning-rate bounds must satisfy 0 < min <= max");
}

}  // namespace

bool SearchSpace::is_singleton() const {
  return activations.size() == 1 && dropouts.size() == 1 && n1.size() == 1 && n2.size() == 1 && lr_min == lr_max;
}

MlpConfig sample_config(const SearchSpace& space, Rng& rng, const MlpConfig& base) {
  validate(space);
  MlpConfig c = base;
  c.activation = space.activations[rng.below(space.activations.size())];
  const double lo = std::log10(space.lr_min);
  const double hi = std::log10(space.lr_max);
  c.learning_rate = std::pow(10.0, rng.uniform(lo, hi));
  if (space.lr_min == space.lr_max) c.learning_rate = space.lr_min;
  c.dropout = space.dropouts[rng.below(space.dropouts.size())];
  c.n1 = space.n1[rng.below(space.n1.size())];
  c.n2 = space.n2[rng.below(space.n2.size())];
  return c;
}

std::vector<BracketPlan> hyperband_schedule(int R, int eta) {
  if (eta < 2 || R < eta) throw SpecError("hyperband needs R >= eta >= 2");
  int s_max = 0;
  while (ipow(eta, s_max + 1) <= R) ++s_max;
  std::vector<BracketPlan> out;
  for (int s = s_max; s >= 0; --s) {
    BracketPlan b;
    b.s = s;
    const long long eta_s = ipow(eta, s);
    const long long n = ((s_max + 1) * eta_s + s) / (s + 1);  // ceil
    for (int i = 0; i <= s; ++i) {
      const long long n_i = n / ipow(eta, i);
      // R * eta^(i-s), floored, at least one epoch
      const auto r_i = std::max<long long>(1, static_cast<long long>(R) * ipow(eta, i) / eta_s);
      if (n_i == 0) break;
      b.rungs.push_back({static_cast<std::size_t>(n_i), static_cast<int>(r_i)});
    }
    out.push_back(std::move(b));
  }
  return out;
}

TunerResult run_hyperband(const TrialFn& trial, const SearchSpace& space, const TunerOptions& options) {
  validate(space);
  TunerResult res;
  res.R = options.R;
  res.eta = options.eta;
  res.seed = options.seed;
  res.brackets = hyperband_schedule(options.R, options.eta);

  Rng sampler(options.seed);
  std::size_t next_sample = 0;
  auto draw = [&] {
    MlpConfig c = sample_config(space, sampler, options.base);
    c.seed = derive_seed(options.seed, next_sample + 1);
    return std::pair{next_sample++, c};
  };

  auto evaluate = [&](const std::vector<std::pair<std::size_t, MlpConfig>>& configs, int budget) {
    std::vector<double> scores(configs.size(), std::numeric_limits<double>::infinity());
    std::vector<std::exception_ptr> errors(configs.size());
    const auto n = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel_trials)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      try {
        scores[iu] = trial(configs[iu].second, budget);
      } catch (const NumericError&) {
        // a diverged trial simply ranks last
      } catch (...) {
        errors[iu] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (double& s : scores) {
      if (!std::isfinite(s)) s = std::numeric_limits<double>::infinity();
    }
    return scores;
  };

  if (space.is_singleton()) {
    const auto sample = draw();
    const double score = evaluate({sample}, options.R).front();
    res.leaderboard.push_back({0, 0, sample.first, sample.second, options.R, score});
    res.total_epochs = options.R;
  } else {
    for (const auto& bracket : res.brackets) {
      std::vector<std::pair<std::size_t, MlpConfig>> live;
      for (std::size_t k = 0; k < bracket.rungs.front().configs; ++k) live.push_back(draw());
      for (std::size_t i = 0; i < bracket.rungs.size(); ++i) {
        const int budget = bracket.rungs[i].budget;
        const auto scores = evaluate(live, budget);
        for (std::size_t k = 0; k < live.size(); ++k) {
          res.leaderboard.push_back({bracket.s, static_cast<int>(i), live[k].first, live[k].second, budget, scores[k]});
          res.total_epochs += budget;
        }
        const std::size_t keep = live.size() / static_cast<std::size_t>(options.eta);
        if (i + 1 == bracket.rungs.size() || keep == 0) break;
        std::vector<std::size_t> order(live.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        // stable: equal scores keep sample order
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
        std::vector<std::size_t> survivors(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
        std::sort(survivors.begin(), survivors.end());
        std::vector<std::pair<std::size_t, MlpConfig>> next;
        for (std::size_t k : survivors) next.push_back(live[k]);
        live = std::move(next);
      }
    }
  }

  const auto best = std::min_element(res.leaderboard.begin(), res.leaderboard.end(),
                                     [](const TrialRecord& a, const TrialRecord& b) { return a.validation_mse < b.validation_mse; });
  res.best_config = best->config;
  res.best_validation_mse = best->validation_mse;
  return res;
}

TunerResult run_hyperband(const DesignMatrix& design, const SplitPlan& split, const SearchSpace& space,
                          const TunerOptions& options) {
  TrialFn trial = [&](const MlpConfig& c, int budget) {
    MlpConfig cfg = c;
    cfg.max_epochs = budget;
    const MlpModel m = train(design, split, cfg);
    return m.trace.at(static_cast<std::size_t>(m.best_epoch - 1)).validation_mse;
  };
  TunerResult res = run_hyperband(trial, space, options);
  if (!std::isfinite(res.best_validation_mse)) throw NumericError("every hyperband trial diverged");
  MlpConfig final_cfg = res.best_config;
  final_cfg.max_epochs = options.final_max_epochs;
  res.final_model = train(design, split, final_cfg);
  return res;
}

nlohmann::json search_space_to_json(const SearchSpace& s) {
  nlohmann::json acts = nlohmann::json::array();
  for (Activation a : s.activations) acts.push_back(activation_name(a));
  return {{"activations", acts},    {"lr_min", s.lr_min}, {"lr_max", s.lr_max},
          {"dropouts", s.dropouts}, {"n1", s.n1},         {"n2", s.n2}};
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
  SearchSpace s;
  if (j.contains("activations")) {
    s.activations.clear();
    for (const auto& a : j.at("activations")) {
      const auto act = parse_activation(a.get<std::string>());
      if (!act) throw SpecError("unknown activation in search space");
      s.activations.push_back(*act);
    }
  }
  s.lr_min = j.value("lr_min", s.lr_min);
  s.lr_max = j.value("lr_max", s.lr_max);
  if (j.contains("dropouts")) s.dropouts = j.at("dropouts").get<std::vector<double>>();
  if (j.contains("n1")) s.n1 = j.at("n1").get<std::vector<std::size_t>>();
  if (j.contains("n2")) s.n2 = j.at("n2").get<std::vector<std::size_t>>();
  validate(s);
  return s;
}

nlohmann::json tuner_result_to_json(const TunerResult& r) {
  nlohmann::json brackets = nlohmann::json::array();
  for (const auto& b : r.brackets) {
    nlohmann::json rungs = nlohmann::json::array();
    for (const auto& rung : b.rungs) rungs.push_back({{"configs", rung.configs}, {"budget", rung.budget}});
    brackets.push_back({{"s", b.s}, {"rungs", rungs}});
  }
  return {{"R", r.R},
          {"eta", r.eta},
          {"seed", r.seed},
          {"rng_version", Rng::kVersion},
          {"best_config", mlp_config_to_json(r.best_config)},
          {"best_validation_mse", r.best_validation_mse},
          {"trials", r.leaderboard.size()},
          {"total_epochs", r.total_epochs},
          {"brackets", brackets}};
}

void write_leaderboard_csv(const TunerResult& r, std::ostream& out) {
  out << "bracket,rung,sample,activation,learning_rate,dropout,n1,n2,budget,validation_mse\n";
  for (const auto& t : r.leaderboard) {
    out << t.bracket << ',' << t.rung << ',' << t.sample_index << ',' << activation_name(t.config.activation) << ','
        << csv::format_number(t.config.learning_rate) << ',' << csv::format_number(t.config.dropout) << ','
        << t.config.n1 << ',' << t.config.n2 << ',' << t.budget << ','
        << (std::isfinite(t.validation_mse) ? csv::format_number(t.validation_mse) : std::string("inf")) << '\n';
  }
}

}  // namespace rdcost

// Serial loops vs their OpenMP twins. Thread count comes from OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <vector>

#include "rdcost/kernels.hpp"
#include "rdcost/mlp.hpp"
#include "rdcost/mlp_kernels.hpp"
#include "rdcost/rng.hpp"

using namespace rdcost;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& v : m.row(r)) v = rng.normal();
  }
  return m;
}

// 15 continuous columns at degree 3: the 815-term expansion
template <bool Parallel>
void BM_ExpandCubic(benchmark::State& state) {
  const Matrix in = random_matrix(static_cast<std::size_t>(state.range(0)), 15, 1);
  const auto terms = polynomial_terms(15, 3);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::expand_monomials(in, terms, out);
    } else {
      kernels::serial::expand_monomials(in, terms, out);
    }
    benchmark::DoNotOptimize(out(0, 0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Standardize(benchmark::State& state) {
  const Matrix base = random_matrix(static_cast<std::size_t>(state.range(0)), 65, 2);
  const std::vector<double> mean(65, 0.1), sd(65, 1.3);
  Matrix X = base;
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::standardize(X, mean, sd);
    } else {
      kernels::serial::standardize(X, mean, sd);
    }
    benchmark::DoNotOptimize(X(0, 0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct Net {
  Layout layout{17, 48, 48};
  std::vector<double> params;
  Matrix X;
  std::vector<std::size_t> rows;
  std::vector<double> y;

  explicit Net(std::size_t n) : X(random_matrix(n, 17, 3)) {
    params = init_model(17, MlpConfig::reference()).params;
    Rng rng(4);
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(i);
      y.push_back(rng.normal());
    }
  }
};

template <bool Parallel>
void BM_BatchGradient(benchmark::State& state) {
  const Net net(static_cast<std::size_t>(state.range(0)));
  std::vector<double> grad(net.params.size());
  for (auto _ : state) {
    double loss = 0.0;
    if constexpr (Parallel) {
      loss = kernels::parallel::batch_gradient(net.layout, net.params, Activation::ReLU, net.X, net.rows, net.y, {},
                                               {}, grad);
    } else {
      loss = kernels::serial::batch_gradient(net.layout, net.params, Activation::ReLU, net.X, net.rows, net.y, {}, {},
                                             grad);
    }
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Predict(benchmark::State& state) {
  const Net net(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(net.rows.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::predict(net.layout, net.params, Activation::ReLU, net.X, net.rows, out);
    } else {
      kernels::serial::predict(net.layout, net.params, Activation::ReLU, net.X, net.rows, out);
    }
    benchmark::DoNotOptimize(out[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ExpandCubic<false>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpandCubic<true>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Standardize<false>)->Arg(26280);
BENCHMARK(BM_Standardize<true>)->Arg(26280);
BENCHMARK(BM_BatchGradient<false>)->Arg(32)->Arg(4096);
BENCHMARK(BM_BatchGradient<true>)->Arg(32)->Arg(4096);
BENCHMARK(BM_Predict<false>)->Arg(26280)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict<true>)->Arg(26280)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <cmath>

#include "visco/energy_diagnostics.hpp"

using namespace visco;

namespace {

DiffState smooth_diff(const PeriodicGrid& g) {
  DiffState W;
  W.F = MatrixField(g);
  W.v = VectorField(g);
  W.S = MatrixField(g);
  VectorField w(g);
  for (int i = 0; i < g.dim; ++i) {
    W.F(i, i) = ScalarField::from_function(g, [&](const auto& x) { return 1e-3 * std::cos(x[i]); });
    W.v(i) = ScalarField::from_function(g, [&](const auto& x) { return 1e-3 * std::sin(x[0]); });
    W.S(i, i) = ScalarField::from_function(g, [&](const auto& x) { return 1e-3 * std::sin(2.0 * x[i]); });
    w(i) = ScalarField::from_function(g, [&](const auto& x) { return 1e-3 * std::cos(x[0]); });
  }
  W.dt_v = std::move(w);
  return W;
}

void BM_EnergySobolev(benchmark::State& state) {
  const PeriodicGrid g(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const DiffState W = smooth_diff(g);
  for (auto _ : state) benchmark::DoNotOptimize(energy_sobolev(W, 1e-2, 1.0));
}
BENCHMARK(BM_EnergySobolev)->Args({1, 64})->Args({2, 32})->Args({3, 16});

void BM_ModulatedEnergy(benchmark::State& state) {
  const PeriodicGrid g(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const DiffState W = smooth_diff(g);
  const MatrixField F_hat(g);
  const StressModel model = StressModel::cubic(1.0, 0.1);
  ModulatedParams p;
  for (auto _ : state) benchmark::DoNotOptimize(modulated_energy(W, p, model, W.F, F_hat));
}
BENCHMARK(BM_ModulatedEnergy)->Args({1, 64})->Args({2, 32});

}  // namespace

#include <benchmark/benchmark.h>

#include <cmath>

#include "visco/spectral.hpp"

using namespace visco;

namespace {

ScalarField smooth(const PeriodicGrid& g) {
  return ScalarField::from_function(g, [&](const auto& x) {
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) s += std::sin((a + 1) * x[a]);
    return s;
  });
}

void BM_SpectralDerivative(benchmark::State& state) {
  const PeriodicGrid g(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const ScalarField f = smooth(g);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_derivative(f, 0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_SpectralDerivative)->Args({1, 64})->Args({1, 1024})->Args({2, 64})->Args({3, 32});

void BM_Laplacian(benchmark::State& state) {
  const PeriodicGrid g(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const ScalarField f = smooth(g);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_laplacian(f));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_Laplacian)->Args({2, 64})->Args({3, 32});

}  // namespace

#include <benchmark/benchmark.h>

#include <cmath>

#include "visco/equilibrium_solver.hpp"
#include "visco/relax_solver.hpp"

using namespace visco;

namespace {

EquilState trig(const PeriodicGrid& g) {
  EquilState s(g);
  for (int i = 0; i < g.dim; ++i) {
    s.F(i, i) = ScalarField::from_function(g, [&](const auto& x) { return 0.1 * std::cos(x[i]); });
    s.v(i) = ScalarField::from_function(g, [&](const auto& x) { return 0.1 * std::sin(x[0]); });
  }
  return s;
}

RelaxConfig relax_config(int d, int n, const StressModel& model) {
  RelaxConfig cfg;
  cfg.eps = 1e-2;
  cfg.model = model;
  cfg.grid = PeriodicGrid(d, n);
  return cfg;
}

void BM_RelaxRhs(benchmark::State& state) {
  const RelaxConfig cfg = relax_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                                       StressModel::cubic(1.0, 0.1));
  const EquilState e = trig(cfg.grid);
  const StateField s = well_prepared_init(e.F_field(), e.v_field(), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(relax_rhs(s, cfg));
}
BENCHMARK(BM_RelaxRhs)->Args({1, 64})->Args({2, 64})->Args({3, 16});

void BM_RelaxStep(benchmark::State& state) {
  const RelaxConfig cfg = relax_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                                       StressModel::cubic(1.0, 0.1));
  const EquilState e = trig(cfg.grid);
  const StateField s = well_prepared_init(e.F_field(), e.v_field(), cfg);
  const double dt = stable_dt(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(rk4_step(s, cfg, dt));
}
BENCHMARK(BM_RelaxStep)->Args({1, 64})->Args({2, 64});

void BM_EquilibriumStep(benchmark::State& state) {
  EquilConfig cfg;
  cfg.model = StressModel::cubic(1.0, 0.1);
  cfg.grid = PeriodicGrid(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const EquilState s = trig(cfg.grid);
  const double dt = equil_stable_dt(s, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(ifrk4_step(s, cfg, dt));
}
BENCHMARK(BM_EquilibriumStep)->Args({1, 64})->Args({2, 64});

}  // namespace

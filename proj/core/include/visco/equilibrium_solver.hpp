#pragma once

#include <span>
#include <vector>

#include "visco/fields.hpp"
#include "visco/grid.hpp"
#include "visco/stress_models.hpp"

namespace visco {

struct EquilConfig {
  double mu = 1.0;
  StressModel model;
  PeriodicGrid grid;
  double t_final = 0.5;
  double cfl_safety = 0.5;

  void validate() const;
};

struct EquilTrajectory {
  std::vector<double> times;
  std::vector<EquilState> states;
  EquilConfig config;
  double dt = 0.0;
};

/// Non-stiff tendencies: F_t = grad v, v_t = div T(F). The mu Lap v term is
/// left to the integrating factor.
EquilState equil_rhs(const EquilState& state, const EquilConfig& cfg);

/// Full tendencies including mu Lap v.
EquilState equil_full_rhs(const EquilState& state, const EquilConfig& cfg);

/// cfl_safety * 2.8 / (sqrt(Gamma) k_max), Gamma sampled from the F field of `state`.
double equil_stable_dt(const EquilState& state, const EquilConfig& cfg);

/// One integrating-factor RK4 step. The linearization at F = 0 (kappa div F + mu Lap v
/// together with grad v) is integrated exactly per Fourier mode; RK4 only sees
/// div(T(F) - kappa F), which vanishes for the linear model.
EquilState ifrk4_step(const EquilState& state, const EquilConfig& cfg, double dt, double t = 0.0);

EquilTrajectory run_equilibrium(const EquilState& init, const EquilConfig& cfg, int sample_every);

/// As run_relax_sampled: equal sub-steps no longer than min(stable dt, max_dt).
EquilTrajectory run_equilibrium_sampled(const EquilState& init, const EquilConfig& cfg,
                                        std::span<const double> sample_times, double max_dt = 0.0);

/// S_hat = T(F_hat) + mu grad v_hat
MatrixField reconstruct_S_hat(const EquilState& state, const EquilConfig& cfg);

/// d_t S_hat by the chain rule, substituting the equilibrium right-hand sides.
MatrixField dt_S_hat(const EquilState& state, const EquilConfig& cfg);

/// d_t v_hat = div T(F_hat) + mu Lap v_hat
VectorField dt_v_hat(const EquilState& state, const EquilConfig& cfg);

/// d_tt v_hat = div(dT(F_hat)[grad v_hat]) + mu Lap(d_t v_hat)
VectorField dtt_v_hat(const EquilState& state, const EquilConfig& cfg);

}  // namespace visco

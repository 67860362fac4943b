#pragma once

#include <span>
#include <vector>

#include "visco/fields.hpp"
#include "visco/grid.hpp"
#include "visco/stress_models.hpp"

namespace visco {

struct RelaxConfig {
  double eps = 1e-2;
  double mu = 1.0;
  StressModel model;
  PeriodicGrid grid;
  double t_final = 0.5;
  double cfl_safety = 0.5;

  void validate() const;
};

struct RelaxTrajectory {
  std::vector<double> times;
  std::vector<StateField> states;
  RelaxConfig config;
  /// Largest step actually taken.
  double dt = 0.0;
  /// Worst high-mode energy fraction of F seen at the sample times.
  double max_high_mode_fraction = 0.0;
};

/// Aliasing warning level for max_high_mode_fraction.
inline constexpr double kAliasingWarningFraction = 1e-8;

/// Tendencies of the relaxation system:
///   F_t = grad v,  v_t = div S,  S_t = (mu/eps) grad v - S/eps + T(F)/eps.
/// Throws BlowUpError on a non-finite state.
StateField relax_rhs(const StateField& state, const RelaxConfig& cfg);

/// cfl_safety * min(2.5 eps, 2.8 / (sqrt(mu/eps) k_max)).
double relax_stable_dt(double eps, double mu, double k_max, double cfl_safety);
double stable_dt(const RelaxConfig& cfg);

/// One classical RK4 step. Throws BlowUpError (stamped with t) on non-finite output.
StateField rk4_step(const StateField& state, const RelaxConfig& cfg, double dt, double t = 0.0);

/// Integrates to cfg.t_final with dt = stable_dt(cfg); samples every `sample_every`
/// steps plus the final time (the last step is shortened to land on t_final).
RelaxTrajectory run_relax(const StateField& init, const RelaxConfig& cfg, int sample_every);

/// Integrates through the given increasing sample times (times[0] is the initial time).
/// Each interval is split into equal steps no longer than min(stable_dt, max_dt).
RelaxTrajectory run_relax_sampled(const StateField& init, const RelaxConfig& cfg,
                                  std::span<const double> sample_times, double max_dt = 0.0);

/// Relaxation data on the equilibrium manifold: S = T(F_hat) + mu grad v_hat.
StateField well_prepared_init(const MatrixField& F_hat0, const VectorField& v_hat0,
                              const RelaxConfig& cfg);

/// L2 norm of eps v_tt + v_t - div T(F) - mu Lap v at every interior sample,
/// with time derivatives from central differences. Requires uniform sampling.
std::vector<double> second_order_residual(const RelaxTrajectory& traj, const RelaxConfig& cfg);

}  // namespace visco

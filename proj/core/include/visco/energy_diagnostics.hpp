#pragma once

#include <optional>
#include <span>
#include <vector>

#include "visco/equilibrium_solver.hpp"
#include "visco/fields.hpp"
#include "visco/relax_solver.hpp"
#include "visco/stress_models.hpp"

namespace visco {

/// Differences W = (F_bar - F_hat, v_bar - v_hat, S_bar - S_hat), optionally with
/// d_t(v_bar - v_hat) obtained from the two right-hand sides.
struct DiffState {
  MatrixField F;
  VectorField v;
  MatrixField S;
  std::optional<VectorField> dt_v;

  const PeriodicGrid& grid() const noexcept { return F.grid(); }
};

/// Builds W from a relaxation state and an equilibrium state at the same time.
/// S_hat and d_t(v_bar - v_hat) come from the model equations, never from time differencing.
DiffState make_diff_state(const StateField& relax, const EquilState& equil, const StressModel& model,
                          double mu);

/// <B^eps W, W>_{L2} = int (mu/eps)|F|^2 - 2 F:S + (mu/eps - 1)|v|^2 + |S|^2 dx.
/// Throws ThresholdError unless eps < mu/4.
double energy_quadratic(const DiffState& W, double eps, double mu);

/// sum_{|gamma| <= max_order} eps E^eps(d_gamma W); max_order = 3 gives the H^3 energy.
double energy_sobolev(const DiffState& W, double eps, double mu, int max_order = 3);

/// int |v|^2 + |F|^2 + eps^2 |d_t v|^2 + eps |grad v|^2 dx over the differences.
/// Throws std::invalid_argument when d_t v is not cached.
double phi_eps(const DiffState& diff, double eps);

struct ModulatedParams {
  double lambda = 2.0;
  double gamma_bound = 1.0;
  double mu = 1.0;
  double eps = 1e-2;

  /// Throws ThresholdError naming the violated bound: lambda > 1 and
  /// eps < min{mu/Gamma, mu/Gamma^2, 1}.
  void validate() const;
};

struct ModulatedEnergy {
  double integral = 0.0;
  ScalarField density;
  /// Q_alpha, one per direction.
  std::vector<ScalarField> flux;
};

/// Relative modulated energy density H_rm and its flux Q_alpha.
ModulatedEnergy modulated_energy(const DiffState& diff, const ModulatedParams& params,
                                 const StressModel& model, const MatrixField& F_bar,
                                 const MatrixField& F_hat);

struct EnergyReport {
  std::vector<double> times;
  std::vector<double> E_eps;
  std::vector<double> E_sobolev;
  std::vector<double> phi;
  std::vector<double> H_rm_integral;
  /// int of the dissipation block and of |grad(v_bar - v_hat)|^2 per sample.
  std::vector<double> dissipation_integral;
  std::vector<double> grad_v_squared_integral;
  /// int |R^eps| dx per sample.
  std::vector<double> remainder_l1;
  /// Space-time L1 norm of lhs - rhs over interior samples.
  double identity_residual_l1 = 0.0;
  /// max_t |int d_alpha Q_alpha dx|
  double max_flux_integral = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  double eps = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  double gamma_bound = 0.0;
};

/// Evaluates every term of the modulated-energy identity at the shared sample
/// times of the two trajectories, together with the measured constants C1..C3, K1, K2.
/// d_t H_rm is the only quantity obtained by central time differences.
/// When params.gamma_bound <= 0 it is sampled from the relaxation F fields.
EnergyReport modulated_residual(const RelaxTrajectory& relax, const EquilTrajectory& equil,
                                ModulatedParams params);

/// Stress reconstructed from the deformation history through the fading-memory kernel
///   S(t) = (mu/eps) F(t) - int_{-inf}^t (1/eps) e^{-(t-tau)/eps} ((mu/eps) F - T(F))(tau) dtau,
/// trapezoidal on the stored times; the history before times[0] is the constant
/// extension of the first sample and its tail is integrated exactly.
MatrixField memory_kernel_S(std::span<const double> times, std::span<const MatrixField> F_history,
                            double eps, double mu, const StressModel& model, double t);

}  // namespace visco

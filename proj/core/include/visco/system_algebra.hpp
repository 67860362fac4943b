#pragma once

#include <vector>

#include <Eigen/Core>

#include "visco/stress_models.hpp"

namespace visco {

/// Block matrices of the first-order difference system W_t + A_alpha d_alpha W = R(W).
///
/// State ordering is (F, v, S), with F and S flattened by matrix_index()
/// (direction outer), giving n = 2 d^2 + d unknowns. Directions are 0-based.
struct SystemMatrices {
  int dim = 0;
  int n = 0;
  double eps = 0.0;
  double mu = 0.0;
  std::vector<Eigen::MatrixXd> A;  // one per direction
  Eigen::MatrixXd B;
};

constexpr int system_size(int d) noexcept { return 2 * d * d + d; }

/// Selector R_alpha (d^2 x d): the alpha-th d-block is the identity.
Eigen::MatrixXd build_R_alpha(int d, int alpha);

/// A_alpha(F)^T as a d^2 x d matrix: entry ((j,beta), i) = dT_{i alpha}/dF_{j beta}.
Eigen::MatrixXd build_calA(const StressModel& model, const SmallMatrix& F, int alpha);

Eigen::MatrixXd build_A_eps(int d, int alpha, double eps, double mu);

/// Symmetrizer with blocks (mu/eps) I, (mu/eps - 1) I, I and -I coupling F and S.
Eigen::MatrixXd build_B_eps(int d, double eps, double mu);

SystemMatrices build_system(int d, double eps, double mu);

/// max_alpha || B A_alpha - (B A_alpha)^T ||_max
double check_symmetrizes(const SystemMatrices& sys);

/// Smallest eigenvalue of B; nonpositive values signal loss of positivity.
double min_eigen_B(int d, double eps, double mu);

}  // namespace visco

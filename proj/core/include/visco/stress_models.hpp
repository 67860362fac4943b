#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace visco {

/// d x d matrix with d <= 3; never heap-allocates.
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

/// d^2 x d^2 matrix with d <= 3.
using JacobianMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 9, 9>;

/// Position of the matrix entry (i, alpha) in a flattened d x d matrix.
/// The direction index alpha is outer, so that the rows belonging to one
/// direction form a contiguous d-block (the layout of the selector R_alpha).
constexpr int matrix_index(int i, int alpha, int d) noexcept { return alpha * d + i; }

enum class StressKind { Linear, Cubic };

/// Constitutive law T(F).
///   Linear: T(F) = kappa F
///   Cubic:  T(F) = kappa F + beta |F|^2 F   (|F| Frobenius norm)
struct StressModel {
  StressKind kind = StressKind::Linear;
  double kappa = 1.0;
  double beta = 0.0;

  static StressModel linear(double kappa);
  static StressModel cubic(double kappa, double beta);

  /// Throws std::invalid_argument unless kappa > 0 and beta >= 0.
  void validate() const;
};

/// Derivative dT_{i alpha} / dF_{j beta}, rows and columns flattened with matrix_index().
struct JacobianTensor {
  int dim = 0;
  JacobianMatrix entries;

  double operator()(int i, int alpha, int j, int beta) const {
    return entries(matrix_index(i, alpha, dim), matrix_index(j, beta, dim));
  }
};

SmallMatrix stress_eval(const StressModel& model, const SmallMatrix& F);

JacobianTensor stress_jacobian(const StressModel& model, const SmallMatrix& F);

/// Worst entrywise error of stress_jacobian against central differences of
/// stress_eval with step h, scaled by max(|J_ij|, max|J|).
double jacobian_fd_check(const StressModel& model, const SmallMatrix& F, double h);

/// Subcharacteristic bound: max over samples of the largest eigenvalue of the
/// symmetric part of the Jacobian.
double subchar_gamma(const StressModel& model, std::span<const SmallMatrix> samples);

/// Smallest C with sum_alpha |(R_alpha - A_alpha(F)^T) v_alpha|^2 <= C mu sum_alpha |v_alpha|^2.
double das_condition_norm(const StressModel& model, const SmallMatrix& F, double mu);

}  // namespace visco

#include "visco/stress_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "visco/system_algebra.hpp"

namespace visco {

namespace {

void require_finite(const SmallMatrix& F) {
  if (F.rows() != F.cols() || F.rows() < 1 || F.rows() > 3) {
    throw std::invalid_argument("stress input must be a square matrix of size 1..3");
  }
  if (!F.allFinite()) throw std::invalid_argument("stress input has non-finite entries");
}

}  // namespace

StressModel StressModel::linear(double kappa) {
  StressModel m{StressKind::Linear, kappa, 0.0};
  m.validate();
  return m;
}

StressModel StressModel::cubic(double kappa, double beta) {
  StressModel m{StressKind::Cubic, kappa, beta};
  m.validate();
  return m;
}

void StressModel::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("stress kappa must be > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("stress beta must be >= 0");
}

SmallMatrix stress_eval(const StressModel& model, const SmallMatrix& F) {
  require_finite(F);
  if (model.kind == StressKind::Linear) return model.kappa * F;
  return (model.kappa + model.beta * F.squaredNorm()) * F;
}

JacobianTensor stress_jacobian(const StressModel& model, const SmallMatrix& F) {
  require_finite(F);
  const int d = static_cast<int>(F.rows());
  const int m = d * d;
  JacobianTensor J;
  J.dim = d;
  J.entries = JacobianMatrix::Identity(m, m);
  if (model.kind == StressKind::Linear) {
    J.entries *= model.kappa;
    return J;
  }
  J.entries *= model.kappa + model.beta * F.squaredNorm();
  // 2 beta F_{i alpha} F_{j beta}
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 9, 1> f(m);
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < d; ++i) f(matrix_index(i, a, d)) = F(i, a);
  J.entries.noalias() += 2.0 * model.beta * f * f.transpose();
  return J;
}

double jacobian_fd_check(const StressModel& model, const SmallMatrix& F, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  const JacobianTensor J = stress_jacobian(model, F);
  const int d = J.dim;
  const double scale = std::max(J.entries.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  for (int b = 0; b < d; ++b) {
    for (int j = 0; j < d; ++j) {
      SmallMatrix plus = F, minus = F;
      plus(j, b) += h;
      minus(j, b) -= h;
      // Divide by the step actually represented in floating point.
      const double step = plus(j, b) - minus(j, b);
      const SmallMatrix diff = stress_eval(model, plus) - stress_eval(model, minus);
      for (int a = 0; a < d; ++a) {
        for (int i = 0; i < d; ++i) {
          const double fd = diff(i, a) / step;
          const double exact = J(i, a, j, b);
          const double err = std::abs(fd - exact) / std::max(std::abs(exact), scale);
          worst = std::max(worst, err);
        }
      }
    }
  }
  return worst;
}

double subchar_gamma(const StressModel& model, std::span<const SmallMatrix> samples) {
  if (samples.empty()) throw std::invalid_argument("subchar_gamma needs at least one sample");
  if (model.kind == StressKind::Linear) {
    for (const auto& F : samples) require_finite(F);
    return model.kappa;
  }
  double gamma = -std::numeric_limits<double>::infinity();
  for (const auto& F : samples) {
    const JacobianTensor J = stress_jacobian(model, F);
    const JacobianMatrix sym = 0.5 * (J.entries + J.entries.transpose());
    Eigen::SelfAdjointEigenSolver<JacobianMatrix> es(sym, Eigen::EigenvaluesOnly);
    gamma = std::max(gamma, es.eigenvalues().maxCoeff());
  }
  return gamma;
}

double das_condition_norm(const StressModel& model, const SmallMatrix& F, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  require_finite(F);
  const int d = static_cast<int>(F.rows());
  const int m = d * d;
  // Block-diagonal map (v_1, ..., v_d) -> ((R_alpha - A_alpha^T) v_alpha)_alpha.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d * m, d * d);
  for (int a = 0; a < d; ++a) {
    M.block(a * m, a * d, m, d) = build_R_alpha(d, a) - build_calA(model, F, a);
  }
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
  return sigma * sigma / mu;
}

}  // namespace visco

#include "visco/system_algebra.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace visco {

namespace {

void check_dim_alpha(int d, int alpha) {
  if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (alpha < 0 || alpha >= d) {
    throw std::out_of_range("direction " + std::to_string(alpha) + " outside [0, " +
                            std::to_string(d) + ")");
  }
}

void check_eps_mu(double eps, double mu) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
}

}  // namespace

Eigen::MatrixXd build_R_alpha(int d, int alpha) {
  check_dim_alpha(d, alpha);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d * d, d);
  R.block(alpha * d, 0, d, d).setIdentity();
  return R;
}

Eigen::MatrixXd build_calA(const StressModel& model, const SmallMatrix& F, int alpha) {
  const int d = static_cast<int>(F.rows());
  check_dim_alpha(d, alpha);
  const JacobianTensor J = stress_jacobian(model, F);
  Eigen::MatrixXd A(d * d, d);
  for (int i = 0; i < d; ++i)
    for (int b = 0; b < d; ++b)
      for (int j = 0; j < d; ++j) A(matrix_index(j, b, d), i) = J(i, alpha, j, b);
  return A;
}

Eigen::MatrixXd build_A_eps(int d, int alpha, double eps, double mu) {
  check_dim_alpha(d, alpha);
  check_eps_mu(eps, mu);
  const int m = d * d;
  const Eigen::MatrixXd R = build_R_alpha(d, alpha);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(system_size(d), system_size(d));
  A.block(0, m, m, d) = -R;
  A.block(m, m + d, d, m) = -R.transpose();
  A.block(m + d, m, m, d) = -(mu / eps) * R;
  return A;
}

Eigen::MatrixXd build_B_eps(int d, double eps, double mu) {
  check_dim_alpha(d, 0);
  check_eps_mu(eps, mu);
  const int m = d * d;
  const double r = mu / eps;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(system_size(d), system_size(d));
  B.block(0, 0, m, m).diagonal().setConstant(r);
  B.block(m, m, d, d).diagonal().setConstant(r - 1.0);
  B.block(m + d, m + d, m, m).diagonal().setConstant(1.0);
  B.block(0, m + d, m, m).diagonal().setConstant(-1.0);
  B.block(m + d, 0, m, m).diagonal().setConstant(-1.0);
  return B;
}

SystemMatrices build_system(int d, double eps, double mu) {
  SystemMatrices sys;
  sys.dim = d;
  sys.n = system_size(d);
  sys.eps = eps;
  sys.mu = mu;
  sys.B = build_B_eps(d, eps, mu);
  for (int a = 0; a < d; ++a) sys.A.push_back(build_A_eps(d, a, eps, mu));
  return sys;
}

double check_symmetrizes(const SystemMatrices& sys) {
  double worst = 0.0;
  for (const auto& A : sys.A) {
    const Eigen::MatrixXd BA = sys.B * A;
    worst = std::max(worst, (BA - BA.transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double min_eigen_B(int d, double eps, double mu) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_B_eps(d, eps, mu), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace visco

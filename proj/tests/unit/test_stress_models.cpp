#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "visco/stress_models.hpp"

using namespace visco;
using visco::testing::random_matrix;
using visco::testing::Rng;

namespace {

SmallMatrix scalar(double x) {
  SmallMatrix m(1, 1);
  m(0, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("linear stress at zero and identity") {
  CHECK(stress_eval(StressModel::linear(1.0), SmallMatrix::Zero(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  const SmallMatrix T = stress_eval(StressModel::linear(0.5), SmallMatrix::Identity(2, 2));
  CHECK((T - 0.5 * SmallMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cubic stress closed form") {
  const StressModel m = StressModel::cubic(1.0, 0.1);
  CHECK(stress_eval(m, scalar(2.0))(0, 0) == doctest::Approx(2.8).epsilon(1e-15));

  // T(F) = (kappa + beta |F|^2) F entrywise for a 2x2 example
  SmallMatrix F(2, 2);
  F << 1.0, -2.0, 0.5, 3.0;
  const double norm2 = 1.0 + 4.0 + 0.25 + 9.0;
  const SmallMatrix T = stress_eval(m, F);
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 2; ++a) CHECK(T(i, a) == doctest::Approx((1.0 + 0.1 * norm2) * F(i, a)));
}

TEST_CASE("stress rejects non-finite input") {
  SmallMatrix F = SmallMatrix::Zero(2, 2);
  F(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(stress_eval(StressModel::linear(1.0), F), std::invalid_argument);
  CHECK_THROWS_AS(stress_jacobian(StressModel::cubic(1.0, 0.1), F), std::invalid_argument);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(StressModel::linear(0.0), std::invalid_argument);
  CHECK_THROWS_AS(StressModel::cubic(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("jacobian closed forms") {
  Rng rng(7);
  for (int d = 1; d <= 3; ++d) {
    const JacobianTensor J = stress_jacobian(StressModel::linear(0.5), random_matrix(rng, d));
    CHECK((J.entries - 0.5 * JacobianMatrix::Identity(d * d, d * d)).cwiseAbs().maxCoeff() == 0.0);
    const JacobianTensor J0 = stress_jacobian(StressModel::cubic(1.0, 0.1), SmallMatrix::Zero(d, d));
    CHECK((J0.entries - JacobianMatrix::Identity(d * d, d * d)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(stress_jacobian(StressModel::cubic(1.0, 0.1), scalar(2.0)).entries(0, 0) == doctest::Approx(2.2));
}

TEST_CASE("cubic jacobian entries follow the index formula") {
  Rng rng(11);
  const double kappa = 1.3, beta = 0.2;
  const SmallMatrix F = random_matrix(rng, 3);
  const JacobianTensor J = stress_jacobian(StressModel::cubic(kappa, beta), F);
  const double n2 = F.squaredNorm();
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a)
      for (int j = 0; j < 3; ++j)
        for (int b = 0; b < 3; ++b) {
          const double expect = (i == j && a == b ? kappa + beta * n2 : 0.0) + 2.0 * beta * F(i, a) * F(j, b);
          CHECK(J(i, a, j, b) == doctest::Approx(expect).epsilon(1e-14));
        }
}

TEST_CASE("cubic jacobian is symmetric") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 3;
    const JacobianTensor J = stress_jacobian(StressModel::cubic(1.0, 0.1), random_matrix(rng, d));
    CHECK((J.entries - J.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("finite-difference agreement") {
  Rng rng(2024);
  for (double kappa : {1.0, 0.5}) {
    for (int d = 1; d <= 3; ++d) CHECK(jacobian_fd_check(StressModel::linear(kappa), random_matrix(rng, d), 1e-5) <= 1e-12);
  }
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    for (int d = 1; d <= 3; ++d) {
      worst = std::max(worst, jacobian_fd_check(StressModel::cubic(1.0, 0.1), random_matrix(rng, d), 1e-5));
    }
  }
  CHECK(worst <= 1e-6);
  for (int d = 1; d <= 3; ++d) CHECK(jacobian_fd_check(StressModel::cubic(1.0, 0.1), SmallMatrix::Zero(d, d), 1e-5) <= 1e-9);
  CHECK_THROWS_AS(jacobian_fd_check(StressModel::linear(1.0), scalar(1.0), 0.0), std::invalid_argument);
}

TEST_CASE("subcharacteristic bound") {
  Rng rng(5);
  std::vector<SmallMatrix> samples;
  for (int k = 0; k < 20; ++k) samples.push_back(random_matrix(rng, 2, -3.0, 3.0));
  CHECK(subchar_gamma(StressModel::linear(0.5), samples) == 0.5);
  CHECK(subchar_gamma(StressModel::linear(1.7), samples) == 1.7);

  const std::vector<SmallMatrix> zero{SmallMatrix::Zero(2, 2)};
  CHECK(subchar_gamma(StressModel::cubic(1.0, 0.1), zero) == doctest::Approx(1.0).epsilon(1e-14));
  const std::vector<SmallMatrix> two{scalar(2.0)};
  CHECK(subchar_gamma(StressModel::cubic(1.0, 0.1), two) == doctest::Approx(2.2).epsilon(1e-14));

  // For the cubic law the top eigenvalue is kappa + 3 beta |F|^2 (direction F itself).
  const SmallMatrix F = random_matrix(rng, 3);
  const std::vector<SmallMatrix> one{F};
  CHECK(subchar_gamma(StressModel::cubic(1.0, 0.1), one) == doctest::Approx(1.0 + 0.3 * F.squaredNorm()).epsilon(1e-12));

  CHECK_THROWS_AS(subchar_gamma(StressModel::linear(1.0), std::vector<SmallMatrix>{}), std::invalid_argument);
}

TEST_CASE("weak parabolicity norm") {
  Rng rng(9);
  for (int d = 1; d <= 3; ++d) {
    CHECK(das_condition_norm(StressModel::linear(1.0), random_matrix(rng, d), 1.0) == 0.0);
    CHECK(das_condition_norm(StressModel::linear(1.0), random_matrix(rng, d), 0.3) == 0.0);
  }
  CHECK(das_condition_norm(StressModel::linear(0.5), scalar(0.0), 1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(das_condition_norm(StressModel::linear(0.5), scalar(0.0), 2.0) == doctest::Approx(0.125).epsilon(1e-14));
  // Linear kappa in d dimensions: every block is (1 - kappa) I, so C = (1 - kappa)^2 / mu.
  CHECK(das_condition_norm(StressModel::linear(0.2), SmallMatrix::Zero(3, 3), 0.5) ==
        doctest::Approx(0.64 / 0.5).epsilon(1e-13));
  CHECK_THROWS_AS(das_condition_norm(StressModel::linear(1.0), scalar(0.0), 0.0), std::invalid_argument);
}

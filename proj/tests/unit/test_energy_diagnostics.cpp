#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "visco/energy_diagnostics.hpp"
#include "visco/equilibrium_solver.hpp"
#include "visco/errors.hpp"
#include "visco/relax_solver.hpp"
#include "visco/spectral.hpp"

using namespace visco;
using namespace visco::testing;

namespace {

constexpr double pi = std::numbers::pi;

DiffState zero_diff(const PeriodicGrid& g) {
  DiffState W;
  W.F = MatrixField(g);
  W.v = VectorField(g);
  W.S = MatrixField(g);
  W.dt_v = VectorField(g);
  return W;
}

DiffState random_diff(const PeriodicGrid& g, Rng& rng, int max_mode) {
  DiffState W = zero_diff(g);
  for (auto& c : W.F.components()) c = random_bandlimited(g, rng, max_mode, 1.0);
  for (auto& c : W.v.components()) c = random_bandlimited(g, rng, max_mode, 1.0);
  for (auto& c : W.S.components()) c = random_bandlimited(g, rng, max_mode, 1.0);
  for (auto& c : W.dt_v->components()) c = random_bandlimited(g, rng, max_mode, 1.0);
  return W;
}

double h3_norm_squared(const FieldBundle& f) {
  double s = 0.0;
  for (const auto& gamma : MultiIndex::up_to(f.dim(), 3))
    for (const auto& c : f.components()) {
      const ScalarField d = multi_derivative(c, gamma);
      s += inner_product_l2(d, d);
    }
  return s;
}

ModulatedParams params(double eps, double lambda = 2.0) {
  ModulatedParams p;
  p.eps = eps;
  p.mu = 1.0;
  p.gamma_bound = 1.0;
  p.lambda = lambda;
  return p;
}

ScalarField sin_x(const PeriodicGrid& g) {
  return ScalarField::from_function(g, [](const auto& x) { return std::sin(x[0]); });
}

ScalarField cos_x(const PeriodicGrid& g) {
  return ScalarField::from_function(g, [](const auto& x) { return std::cos(x[0]); });
}

EquilState trig_equil(const PeriodicGrid& g, double a, double b) {
  EquilState s(g);
  for (int i = 0; i < g.dim; ++i) {
    s.F(i, i) = ScalarField::from_function(g, [&](const auto& x) { return a * std::cos(x[i]); });
    s.v(i) = ScalarField::from_function(g, [&](const auto& x) { return b * std::sin(x[0]); });
  }
  return s;
}

}  // namespace

TEST_CASE("quadratic energy closed forms") {
  const PeriodicGrid g(1, 16);
  DiffState W = zero_diff(g);
  CHECK(energy_quadratic(W, 0.1, 1.0) == 0.0);

  W.F.component(0) = ScalarField(g, 1.0);
  CHECK(energy_quadratic(W, 0.1, 1.0) == doctest::Approx(20.0 * pi).epsilon(1e-13));

  W.S.component(0) = ScalarField(g, 1.0);
  CHECK(energy_quadratic(W, 0.2, 1.0) == doctest::Approx(8.0 * pi).epsilon(1e-13));

  CHECK_THROWS_AS(energy_quadratic(W, 0.25, 1.0), ThresholdError);
  CHECK_THROWS_AS(energy_quadratic(W, 0.3, 1.0), ThresholdError);
}

TEST_CASE("quadratic energy dominates the diagonal bound") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const PeriodicGrid g(1 + trial % 3, trial % 3 == 2 ? 8 : 16);
    const double mu = uniform(rng, 0.2, 3.0);
    const double eps = uniform(rng, 0.01, 0.249) * mu;
    const DiffState W = random_diff(g, rng, 3);
    const double lower =
        0.5 * ((mu / eps) * (W.F.norm_l2_squared() + W.v.norm_l2_squared()) + W.S.norm_l2_squared());
    CHECK(energy_quadratic(W, eps, mu) - lower >= -1e-12 * lower);
  }
}

TEST_CASE("Sobolev energy of a cosine") {
  const PeriodicGrid g(1, 32);
  DiffState W = zero_diff(g);
  CHECK(energy_sobolev(W, 0.1, 1.0) == 0.0);
  W.F.component(0) = cos_x(g);
  for (double eps : {0.2, 0.1, 1e-3}) CHECK(energy_sobolev(W, eps, 1.0) == doctest::Approx(4.0 * pi).epsilon(1e-12));
  CHECK_THROWS_AS(energy_sobolev(W, 0.25, 1.0), ThresholdError);
  CHECK_THROWS_AS(energy_sobolev(W, 0.1, 1.0, 4), std::invalid_argument);
}

TEST_CASE("Sobolev energy at order zero is eps times the quadratic energy") {
  Rng rng(22);
  for (int d = 1; d <= 3; ++d) {
    const PeriodicGrid g(d, d == 3 ? 8 : 16);
    const DiffState W = random_diff(g, rng, 3);
    CHECK(energy_sobolev(W, 0.05, 1.0, 0) == 0.05 * energy_quadratic(W, 0.05, 1.0));
  }
}

TEST_CASE("Sobolev energy is equivalent to the weighted H3 norm") {
  Rng rng(23);
  const double mu = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const PeriodicGrid g(1 + trial % 2, 16);
    const double eps = uniform(rng, 1e-3, 0.24);
    const DiffState W = random_diff(g, rng, 4);
    const double norm = h3_norm_squared(W.F) + h3_norm_squared(W.v) + eps * h3_norm_squared(W.S);
    const double E = energy_sobolev(W, eps, mu);
    CHECK(E >= 0.5 * norm * (1.0 - 1e-12));
    CHECK(E <= 2.0 * (mu / eps + 1.0) * norm);
  }
}

TEST_CASE("phi closed form and scaling") {
  const PeriodicGrid g(1, 32);
  DiffState W = zero_diff(g);
  CHECK(phi_eps(W, 0.1) == 0.0);
  W.v.component(0) = sin_x(g);
  for (double eps : {0.1, 0.01}) CHECK(phi_eps(W, eps) == doctest::Approx(pi + eps * pi).epsilon(1e-12));

  W.dt_v->component(0) = cos_x(g);
  CHECK(phi_eps(W, 0.1) == doctest::Approx(pi + 0.1 * pi + 0.01 * pi).epsilon(1e-12));

  Rng rng(24);
  const PeriodicGrid g2(2, 16);
  const DiffState R = random_diff(g2, rng, 4);
  DiffState R3 = R;
  R3.F *= 3.0;
  R3.v *= 3.0;
  R3.S *= 3.0;
  *R3.dt_v *= 3.0;
  CHECK(phi_eps(R3, 0.02) == doctest::Approx(9.0 * phi_eps(R, 0.02)).epsilon(1e-12));

  W.dt_v.reset();
  CHECK_THROWS_AS(phi_eps(W, 0.1), std::invalid_argument);
}

TEST_CASE("modulated parameter thresholds") {
  CHECK_NOTHROW(params(1e-2).validate());
  CHECK_THROWS_AS(params(1e-2, 1.0).validate(), ThresholdError);
  ModulatedParams p = params(0.6);
  p.gamma_bound = 2.0;
  CHECK_THROWS_AS(p.validate(), ThresholdError);
  p.gamma_bound = 1.5;
  p.eps = 0.5;
  CHECK_THROWS_AS(p.validate(), ThresholdError);
  p.mu = 4.0;
  p.gamma_bound = 0.5;
  p.eps = 1.5;
  CHECK_THROWS_AS(p.validate(), ThresholdError);
  p.eps = 0.9;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("modulated energy of a zero difference") {
  const PeriodicGrid g(2, 16);
  const DiffState W = zero_diff(g);
  const MatrixField F(g);
  const ModulatedEnergy me = modulated_energy(W, params(1e-2), StressModel::linear(1.0), F, F);
  CHECK(me.integral == 0.0);
  CHECK(field_linf(me.density) == 0.0);
  REQUIRE(me.flux.size() == 2);
  for (const auto& q : me.flux) CHECK(field_linf(q) == 0.0);

  DiffState missing = W;
  missing.dt_v.reset();
  CHECK_THROWS_AS(modulated_energy(missing, params(1e-2), StressModel::linear(1.0), F, F), std::invalid_argument);
  CHECK_THROWS_AS(modulated_energy(W, params(1e-2, 0.9), StressModel::linear(1.0), F, F), ThresholdError);
}

TEST_CASE("modulated energy density of a single mode") {
  const PeriodicGrid g(1, 32);
  const double eps = 0.05, lam = 2.0, mu = 1.0;
  DiffState W = zero_diff(g);
  W.v.component(0) = sin_x(g);
  W.dt_v->component(0) = cos_x(g);
  const MatrixField Fz(g);
  const ModulatedEnergy me = modulated_energy(W, params(eps, lam), StressModel::linear(1.0), Fz, Fz);
  // 1/2 sin^2 + eps sin cos + 1/2 eps^2 lam cos^2 + 1/2 eps lam mu cos^2
  CHECK(me.integral == doctest::Approx(0.5 * pi + 0.5 * eps * eps * lam * pi + 0.5 * eps * lam * mu * pi).epsilon(1e-12));
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double x = g.coordinate(p, 0);
    const double s = std::sin(x), c = std::cos(x);
    const double h = 0.5 * s * s + eps * s * c + 0.5 * eps * eps * lam * c * c + 0.5 * eps * lam * mu * c * c;
    CHECK(me.density[p] == doctest::Approx(h).epsilon(1e-12));
  }

  // Stress difference enters through eps lam grad v : (T(F_bar) - T(F_hat)).
  MatrixField Fb(g);
  Fb.component(0) = cos_x(g);
  DiffState W2 = zero_diff(g);
  W2.v.component(0) = sin_x(g);
  W2.F.component(0) = cos_x(g);
  const ModulatedEnergy me2 = modulated_energy(W2, params(eps, lam), StressModel::linear(0.5), Fb, Fz);
  const double expect = 0.5 * pi + 0.5 * pi + 0.5 * eps * lam * mu * pi + eps * lam * 0.5 * pi;
  CHECK(me2.integral == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("modulated energy is coercive on random differences") {
  Rng rng(25);
  const double eps = 1e-2;
  const StressModel model = StressModel::linear(1.0);
  double C2 = 0.0, C3 = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const PeriodicGrid g(1 + trial % 2, 16);
    DiffState W = random_diff(g, rng, 4);
    MatrixField F_hat(g);
    for (auto& c : F_hat.components()) c = random_bandlimited(g, rng, 4, 1.0);
    MatrixField F_bar = F_hat;
    F_bar += W.F;
    const ModulatedEnergy me = modulated_energy(W, params(eps), model, F_bar, F_hat);
    const double ratio = me.integral / phi_eps(W, eps);
    C2 = std::max(C2, ratio);
    C3 = std::min(C3, ratio);
  }
  CHECK(C3 > 0.0);
  CHECK(C2 >= C3);
  CHECK(C2 < 10.0);
}

TEST_CASE("coercivity margin as lambda approaches one") {
  Rng rng(28);
  const StressModel model = StressModel::linear(1.0);
  std::vector<DiffState> diffs;
  std::vector<MatrixField> F_hats;
  for (int trial = 0; trial < 50; ++trial) {
    const PeriodicGrid g(1, 16);
    diffs.push_back(random_diff(g, rng, 4));
    MatrixField F_hat(g);
    for (auto& c : F_hat.components()) c = random_bandlimited(g, rng, 4, 1.0);
    F_hats.push_back(F_hat);
  }
  for (double eps : {0.9, 0.5, 1e-2}) {
    double last = 1e300;
    for (double lam : {4.0, 3.0, 2.0, 1.5, 1.2, 1.05, 1.01}) {
      double C3 = 1e300;
      for (std::size_t k = 0; k < diffs.size(); ++k) {
        MatrixField F_bar = F_hats[k];
        F_bar += diffs[k].F;
        const ModulatedEnergy me = modulated_energy(diffs[k], params(eps, lam), model, F_bar, F_hats[k]);
        C3 = std::min(C3, me.integral / phi_eps(diffs[k], eps));
      }
      CHECK(C3 > 0.0);
      CHECK(C3 < last);
      last = C3;
    }
  }
}

TEST_CASE("flux has zero mean divergence") {
  Rng rng(26);
  const StressModel model = StressModel::cubic(1.0, 0.1);
  for (int d = 1; d <= 3; ++d) {
    const PeriodicGrid g(d, d == 3 ? 8 : 16);
    const DiffState W = random_diff(g, rng, 3);
    MatrixField F_hat(g);
    for (auto& c : F_hat.components()) c = random_bandlimited(g, rng, 2, 0.3);
    MatrixField F_bar = F_hat;
    F_bar += W.F;
    ModulatedParams p = params(1e-2);
    p.gamma_bound = subchar_gamma(model, F_bar.samples());
    p.eps = 0.5 * std::min(1.0 / p.gamma_bound, 1.0 / (p.gamma_bound * p.gamma_bound));
    const ModulatedEnergy me = modulated_energy(W, p, model, F_bar, F_hat);
    ScalarField div(g);
    for (int a = 0; a < d; ++a) div += spectral_derivative(me.flux[a], a);
    CHECK(std::abs(integrate(div)) <= 1e-10);
  }
}

TEST_CASE("identical trajectories give a zero residual") {
  const PeriodicGrid g(1, 32);
  EquilConfig ec;
  ec.mu = 1.0;
  ec.model = StressModel::cubic(1.0, 0.1);
  ec.grid = g;
  ec.t_final = 0.2;
  const EquilTrajectory eq = run_equilibrium(trig_equil(g, 0.2, 0.2), ec, 4);

  RelaxConfig rc;
  rc.eps = 1e-2;
  rc.mu = ec.mu;
  rc.model = ec.model;
  rc.grid = g;
  RelaxTrajectory rel;
  rel.config = rc;
  rel.times = eq.times;
  for (const auto& s : eq.states) rel.states.push_back(well_prepared_init(s.F_field(), s.v_field(), rc));

  const EnergyReport rep = modulated_residual(rel, eq, ModulatedParams{});
  CHECK(rep.times.size() == eq.times.size());
  CHECK(rep.identity_residual_l1 <= 1e-12);
  CHECK(rep.max_flux_integral <= 1e-12);
  for (double x : rep.E_sobolev) CHECK(x <= 1e-24);
  for (double x : rep.phi) CHECK(x <= 1e-24);
  for (double x : rep.remainder_l1) CHECK(x <= 1e-12);
  CHECK(rep.K1 <= 1e-8);
  CHECK(rep.gamma_bound >= 1.0);
}

TEST_CASE("modulated residual on coupled runs") {
  const PeriodicGrid g(1, 32);
  const double eps = 1e-2;
  EquilConfig ec;
  ec.mu = 1.0;
  ec.model = StressModel::cubic(1.0, 0.1);
  ec.grid = g;
  ec.t_final = 0.2;
  RelaxConfig rc;
  rc.eps = eps;
  rc.mu = ec.mu;
  rc.model = ec.model;
  rc.grid = g;
  rc.t_final = ec.t_final;

  const EquilState init = trig_equil(g, 0.1, 0.1);
  std::vector<double> times;
  for (int k = 0; k <= 40; ++k) times.push_back(ec.t_final * k / 40.0);
  const double dt = stable_dt(rc);
  const RelaxTrajectory rel = run_relax_sampled(well_prepared_init(init.F_field(), init.v_field(), rc), rc, times);
  const EquilTrajectory eq = run_equilibrium_sampled(init, ec, times, dt);

  const EnergyReport rep = modulated_residual(rel, eq, ModulatedParams{});
  CHECK(rep.E_eps.size() == times.size());
  CHECK(rep.H_rm_integral.size() == times.size());
  CHECK(rep.max_flux_integral <= 1e-10);
  CHECK(std::isfinite(rep.K1));
  CHECK(std::isfinite(rep.K2));
  CHECK(rep.K1 > 0.0);
  CHECK(rep.C1 > 0.0);
  CHECK(rep.C3 > 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(rep.remainder_l1[k] <= eps * eps * rep.K1 + rep.K2 * rep.H_rm_integral[k] + 1e-15);
  }

  RelaxTrajectory shifted = rel;
  shifted.times.back() += 1e-3;
  CHECK_THROWS_AS(modulated_residual(shifted, eq, ModulatedParams{}), std::invalid_argument);
  RelaxTrajectory other_mu = rel;
  other_mu.config.mu = 2.0;
  CHECK_THROWS_AS(modulated_residual(other_mu, eq, ModulatedParams{}), std::invalid_argument);
}

TEST_CASE("memory kernel of a constant history") {
  const PeriodicGrid g(2, 8);
  Rng rng(27);
  const StressModel model = StressModel::cubic(1.0, 0.1);
  const SmallMatrix F0 = random_matrix(rng, 2);
  MatrixField F(g);
  for (std::size_t p = 0; p < g.size(); ++p) F.set(p, F0);
  const SmallMatrix T0 = stress_eval(model, F0);

  const double eps = 0.1, mu = 1.0, h = eps / 50.0;
  std::vector<double> times;
  std::vector<MatrixField> hist;
  for (int k = 0; k <= 100; ++k) {
    times.push_back(k * h);
    hist.push_back(F);
  }
  // At the first sample only the closed-form tail contributes.
  const MatrixField S0 = memory_kernel_S(times, hist, eps, mu, model, 0.0);
  CHECK((S0.at(5) - T0).cwiseAbs().maxCoeff() <= 1e-13);

  // Later the trapezoid error of the exponential weight is h^2 / (12 eps^2) relative.
  const double G = (mu / eps) * F0.cwiseAbs().maxCoeff() + T0.cwiseAbs().maxCoeff();
  for (double t : {0.05, 0.137, 0.2}) {
    const MatrixField S = memory_kernel_S(times, hist, eps, mu, model, t);
    CHECK((S.at(0) - T0).cwiseAbs().maxCoeff() <= G * h * h / (12.0 * eps * eps) * 1.01);
  }

  CHECK_THROWS_AS(memory_kernel_S(times, hist, eps, mu, model, 0.3), std::out_of_range);
  CHECK_THROWS_AS(memory_kernel_S(times, hist, eps, mu, model, -0.1), std::out_of_range);
  hist.pop_back();
  CHECK_THROWS_AS(memory_kernel_S(times, hist, eps, mu, model, 0.1), std::invalid_argument);
}

TEST_CASE("memory kernel on a steady relaxation run") {
  const PeriodicGrid g(1, 16);
  RelaxConfig rc;
  rc.eps = 0.1;
  rc.mu = 1.0;
  rc.model = StressModel::cubic(1.0, 0.1);
  rc.grid = g;
  rc.t_final = 1.0;
  MatrixField F(g);
  F.component(0) = ScalarField(g, 0.4);
  const StateField init(F, VectorField(g), apply_stress(rc.model, F));
  std::vector<double> times;
  for (int k = 0; k <= 200; ++k) times.push_back(k * rc.t_final / 200.0);
  const RelaxTrajectory traj = run_relax_sampled(init, rc, times);
  std::vector<MatrixField> hist;
  for (const auto& s : traj.states) hist.push_back(s.F_field());
  const double h = times[1], G = (rc.mu / rc.eps) * 0.4;
  for (std::size_t k : {std::size_t{0}, std::size_t{57}, std::size_t{200}}) {
    const MatrixField S = memory_kernel_S(times, hist, rc.eps, rc.mu, rc.model, times[k]);
    const double err = field_linf(S.component(0) - traj.states[k].S(0, 0));
    CHECK(err <= G * h * h / (12.0 * rc.eps * rc.eps) * 1.01 + 1e-14);
  }
}

TEST_CASE("memory kernel converges at second order") {
  // F(t) = sin(t) F0 with a linear law; the convolution has a closed form.
  const PeriodicGrid g(1, 8);
  const double eps = 0.1, mu = 1.0, kappa = 0.5, t = 1.0;
  const StressModel model = StressModel::linear(kappa);
  const double a = 1.0 / eps;
  const double conv = (a * std::sin(t) - std::cos(t) + std::exp(-t / eps)) / (eps * (a * a + 1.0));
  const double exact = (mu / eps) * std::sin(t) - (mu / eps - kappa) * conv;

  auto error = [&](int n) {
    std::vector<double> times;
    std::vector<MatrixField> hist;
    for (int k = 0; k <= n; ++k) {
      const double tk = t * k / n;
      times.push_back(tk);
      MatrixField F(g);
      F.component(0) = ScalarField(g, std::sin(tk));
      hist.push_back(F);
    }
    return std::abs(memory_kernel_S(times, hist, eps, mu, model, t).component(0)[3] - exact);
  };
  const double e1 = error(200), e2 = error(400), e3 = error(800);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.05));

  // Off-grid evaluation interpolates the last panel linearly; still second order.
  auto off = [&](int n) {
    std::vector<double> times;
    std::vector<MatrixField> hist;
    for (int k = 0; k <= n + 1; ++k) {
      const double tk = t * k / n;
      times.push_back(tk);
      MatrixField F(g);
      F.component(0) = ScalarField(g, std::sin(tk));
      hist.push_back(F);
    }
    const double s = t - 0.3 * t / n;
    const double c = (a * std::sin(s) - std::cos(s) + std::exp(-s / eps)) / (eps * (a * a + 1.0));
    const double ex = (mu / eps) * std::sin(s) - (mu / eps - kappa) * c;
    return std::abs(memory_kernel_S(times, hist, eps, mu, model, s).component(0)[0] - ex);
  };
  CHECK(off(200) / off(400) > 3.5);
}

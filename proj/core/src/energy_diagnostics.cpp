#include "visco/energy_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "visco/errors.hpp"
#include "visco/spectral.hpp"

namespace visco {

namespace {

EquilConfig equil_context(const StressModel& model, double mu, const PeriodicGrid& grid) {
  EquilConfig cfg;
  cfg.mu = mu;
  cfg.model = model;
  cfg.grid = grid;
  return cfg;
}

void require_symmetrizer_range(double eps, double mu) {
  if (!(eps > 0.0) || !(mu > 0.0)) throw std::invalid_argument("eps and mu must be > 0");
  if (!(eps < mu / 4.0)) {
    throw ThresholdError("eps " + std::to_string(eps) + " >= mu/4 = " + std::to_string(mu / 4.0) +
                         "; the symmetrizer energy is not positive definite there");
  }
}

// sum_{i alpha} A_{i alpha} B_{i alpha} pointwise
ScalarField contract(const MatrixField& A, const MatrixField& B) {
  ScalarField out(A.grid());
  for (int c = 0; c < A.component_count(); ++c) {
    const auto a = A.component(c).values();
    const auto b = B.component(c).values();
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += a[p] * b[p];
  }
  return out;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
  ScalarField out(a.grid());
  for (int c = 0; c < a.component_count(); ++c) {
    const auto x = a.component(c).values();
    const auto y = b.component(c).values();
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += x[p] * y[p];
  }
  return out;
}

double l1(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.values()) s += std::abs(x);
  return s * f.grid().cell_volume();
}

}  // namespace

DiffState make_diff_state(const StateField& relax, const EquilState& equil, const StressModel& model, double mu) {
  if (!(relax.grid() == equil.grid())) throw std::invalid_argument("relaxation and equilibrium states on different grids");
  const EquilConfig cfg = equil_context(model, mu, relax.grid());
  DiffState W;
  W.F = relax.F_field();
  W.F -= equil.F_field();
  W.v = relax.v_field();
  W.v -= equil.v_field();
  W.S = relax.S_field();
  W.S -= reconstruct_S_hat(equil, cfg);
  VectorField dtv = divergence(relax.S_field());
  dtv -= dt_v_hat(equil, cfg);
  W.dt_v = std::move(dtv);
  return W;
}

double energy_quadratic(const DiffState& W, double eps, double mu) {
  require_symmetrizer_range(eps, mu);
  const double r = mu / eps;
  double F2 = 0.0, v2 = 0.0, S2 = 0.0, FS = 0.0;
  for (int c = 0; c < W.F.component_count(); ++c) {
    F2 += inner_product_l2(W.F.component(c), W.F.component(c));
    S2 += inner_product_l2(W.S.component(c), W.S.component(c));
    FS += inner_product_l2(W.F.component(c), W.S.component(c));
  }
  for (int c = 0; c < W.v.component_count(); ++c) v2 += inner_product_l2(W.v.component(c), W.v.component(c));
  return r * F2 - 2.0 * FS + (r - 1.0) * v2 + S2;
}

double energy_sobolev(const DiffState& W, double eps, double mu, int max_order) {
  require_symmetrizer_range(eps, mu);
  if (max_order < 0 || max_order > 3) throw std::invalid_argument("Sobolev order must lie in [0, 3]");
  double total = 0.0;
  for (const MultiIndex& gamma : MultiIndex::up_to(W.grid().dim, max_order)) {
    DiffState dW;
    dW.F = MatrixField(W.grid());
    dW.v = VectorField(W.grid());
    dW.S = MatrixField(W.grid());
    for (int c = 0; c < W.F.component_count(); ++c) {
      dW.F.component(c) = multi_derivative(W.F.component(c), gamma);
      dW.S.component(c) = multi_derivative(W.S.component(c), gamma);
    }
    for (int c = 0; c < W.v.component_count(); ++c) dW.v.component(c) = multi_derivative(W.v.component(c), gamma);
    total += eps * energy_quadratic(dW, eps, mu);
  }
  return total;
}

double phi_eps(const DiffState& diff, double eps) {
  if (!diff.dt_v) throw std::invalid_argument("phi_eps needs the cached time derivative of v_bar - v_hat");
  double total = diff.v.norm_l2_squared() + diff.F.norm_l2_squared();
  total += eps * eps * diff.dt_v->norm_l2_squared();
  total += eps * gradient(diff.v).norm_l2_squared();
  return total;
}

void ModulatedParams::validate() const {
  if (!(lambda > 1.0)) throw ThresholdError("lambda must be > 1 (got " + std::to_string(lambda) + ")");
  if (!(mu > 0.0) || !(eps > 0.0)) throw std::invalid_argument("eps and mu must be > 0");
  if (!(gamma_bound > 0.0)) throw ThresholdError("Gamma must be > 0");
  if (!(eps < mu / gamma_bound)) throw ThresholdError("eps must be < mu/Gamma = " + std::to_string(mu / gamma_bound));
  if (!(eps < mu / (gamma_bound * gamma_bound))) {
    throw ThresholdError("eps must be < mu/Gamma^2 = " + std::to_string(mu / (gamma_bound * gamma_bound)));
  }
  if (!(eps < 1.0)) throw ThresholdError("eps must be < 1");
}

ModulatedEnergy modulated_energy(const DiffState& diff, const ModulatedParams& params, const StressModel& model,
                                 const MatrixField& F_bar, const MatrixField& F_hat) {
  params.validate();
  if (!diff.dt_v) throw std::invalid_argument("modulated energy needs the cached time derivative of v_bar - v_hat");
  const int d = diff.grid().dim;
  const double eps = params.eps, lam = params.lambda, mu = params.mu;
  const VectorField& v = diff.v;
  const VectorField& w = *diff.dt_v;
  MatrixField D = apply_stress(model, F_bar);
  D -= apply_stress(model, F_hat);
  const MatrixField gv = gradient(v);

  ModulatedEnergy out;
  ScalarField H = 0.5 * (dot(v, v) + contract(diff.F, diff.F));
  H.axpy(eps, dot(v, w));
  H.axpy(0.5 * eps * eps * lam, dot(w, w));
  H.axpy(0.5 * eps * lam * mu, contract(gv, gv));
  H.axpy(eps * lam, contract(gv, D));
  out.integral = integrate(H);
  out.density = std::move(H);

  for (int a = 0; a < d; ++a) {
    ScalarField Q(diff.grid());
    for (int i = 0; i < d; ++i) {
      Q += v(i) * D(i, a);
      Q.axpy(mu, v(i) * gv(i, a));
      Q.axpy(eps * lam * mu, w(i) * gv(i, a));
      Q.axpy(eps * lam, w(i) * D(i, a));
    }
    out.flux.push_back(std::move(Q));
  }
  return out;
}

EnergyReport modulated_residual(const RelaxTrajectory& relax, const EquilTrajectory& equil, ModulatedParams params) {
  const std::size_t n = relax.times.size();
  if (n != equil.times.size() || n == 0) throw std::invalid_argument("trajectories have different sample counts");
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(relax.times[k] - equil.times[k]) > 1e-12 * std::max(1.0, std::abs(relax.times[k]))) {
      throw std::invalid_argument("trajectories are sampled at different times");
    }
  }
  const RelaxConfig& rc = relax.config;
  if (!(rc.grid == equil.config.grid)) throw std::invalid_argument("trajectories live on different grids");
  if (rc.mu != equil.config.mu) throw std::invalid_argument("trajectories use different mu");
  if (rc.model.kind != equil.config.model.kind || rc.model.kappa != equil.config.model.kappa ||
      rc.model.beta != equil.config.model.beta) {
    throw std::invalid_argument("trajectories use different stress models");
  }

  params.eps = rc.eps;
  params.mu = rc.mu;
  if (!(params.gamma_bound > 0.0)) {
    double gamma = 0.0;
    for (const auto& s : relax.states) {
      const auto samples = s.F_field().samples();
      gamma = std::max(gamma, subchar_gamma(rc.model, samples));
    }
    params.gamma_bound = gamma;
  }
  params.validate();

  const StressModel& model = rc.model;
  const double eps = params.eps, mu = params.mu, lam = params.lambda;
  const EquilConfig ec = equil_context(model, mu, rc.grid);
  const bool quadratic_defined = eps < mu / 4.0;

  EnergyReport rep;
  rep.eps = eps;
  rep.mu = mu;
  rep.lambda = lam;
  rep.gamma_bound = params.gamma_bound;
  rep.times = relax.times;

  std::vector<ScalarField> H(n), rest(n);
  for (std::size_t k = 0; k < n; ++k) {
    const StateField& rs = relax.states[k];
    const EquilState& es = equil.states[k];
    const DiffState W = make_diff_state(rs, es, model, mu);
    const MatrixField F_bar = rs.F_field();
    const MatrixField F_hat = es.F_field();
    const ModulatedEnergy me = modulated_energy(W, params, model, F_bar, F_hat);

    rep.E_eps.push_back(quadratic_defined ? energy_quadratic(W, eps, mu) : 0.0);
    rep.E_sobolev.push_back(quadratic_defined ? energy_sobolev(W, eps, mu) : 0.0);
    rep.phi.push_back(phi_eps(W, eps));
    rep.H_rm_integral.push_back(me.integral);

    const VectorField& w = *W.dt_v;
    const MatrixField gv = gradient(W.v);
    const MatrixField dtF_hat = gradient(es.v_field());
    MatrixField D = apply_stress(model, F_bar);
    D -= apply_stress(model, F_hat);

    // mu |grad v|^2 - eps lambda grad v : dT(F_bar)[grad v]
    const ScalarField grad2 = contract(gv, gv);
    ScalarField diss = mu * grad2;
    diss.axpy(-eps * lam, contract(gv, apply_stress_jacobian(model, F_bar, gv)));
    rep.dissipation_integral.push_back(integrate(diss));
    rep.grad_v_squared_integral.push_back(integrate(grad2));

    // R^eps
    MatrixField FmD = W.F;
    FmD -= D;
    const VectorField vtt_hat = dtt_v_hat(es, ec);
    MatrixField dJ = apply_stress_jacobian(model, F_bar, dtF_hat);
    dJ -= apply_stress_jacobian(model, F_hat, dtF_hat);
    ScalarField R = contract(gv, FmD);
    R.axpy(-eps, dot(vtt_hat, W.v));
    R.axpy(-eps * eps * lam, dot(vtt_hat, w));
    R.axpy(eps * lam, contract(gv, dJ));
    rep.remainder_l1.push_back(l1(R));

    ScalarField divQ(rc.grid);
    for (int a = 0; a < rc.grid.dim; ++a) divQ += spectral_derivative(me.flux[a], a);
    rep.max_flux_integral = std::max(rep.max_flux_integral, std::abs(integrate(divQ)));

    ScalarField r = diss;
    r -= divQ;
    r.axpy(eps * (lam - 1.0), dot(w, w));
    r -= R;
    rest[k] = std::move(r);
    H[k] = me.density;
  }

  // d_t H_rm by three-point differences at interior samples.
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h1 = rep.times[k] - rep.times[k - 1];
    const double h2 = rep.times[k + 1] - rep.times[k];
    const double cm = -h2 / (h1 * (h1 + h2));
    const double c0 = (h2 - h1) / (h1 * h2);
    const double cp = h1 / (h2 * (h1 + h2));
    ScalarField res = rest[k];
    res.axpy(cm, H[k - 1]);
    res.axpy(c0, H[k]);
    res.axpy(cp, H[k + 1]);
    rep.identity_residual_l1 += l1(res) * 0.5 * (h1 + h2);
  }

  // Measured constants.
  const double phi_max = n ? *std::max_element(rep.phi.begin(), rep.phi.end()) : 0.0;
  const double grad_max =
      n ? *std::max_element(rep.grad_v_squared_integral.begin(), rep.grad_v_squared_integral.end()) : 0.0;
  bool have_c23 = false, have_c1 = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (rep.phi[k] > 1e-12 * phi_max && rep.phi[k] > 0.0) {
      const double ratio = rep.H_rm_integral[k] / rep.phi[k];
      rep.C2 = have_c23 ? std::max(rep.C2, ratio) : ratio;
      rep.C3 = have_c23 ? std::min(rep.C3, ratio) : ratio;
      have_c23 = true;
    }
    if (rep.grad_v_squared_integral[k] > 1e-12 * grad_max && rep.grad_v_squared_integral[k] > 0.0) {
      const double ratio = rep.dissipation_integral[k] / rep.grad_v_squared_integral[k];
      rep.C1 = have_c1 ? std::min(rep.C1, ratio) : ratio;
      have_c1 = true;
    }
  }
  double worst_R = 0.0;
  for (double r : rep.remainder_l1) worst_R = std::max(worst_R, r);
  rep.K1 = worst_R / (2.0 * eps * eps);
  for (std::size_t k = 0; k < n; ++k) {
    const double excess = rep.remainder_l1[k] - eps * eps * rep.K1;
    if (excess > 0.0 && rep.H_rm_integral[k] > 0.0) rep.K2 = std::max(rep.K2, excess / rep.H_rm_integral[k]);
  }
  return rep;
}

MatrixField memory_kernel_S(std::span<const double> times, std::span<const MatrixField> F_history, double eps,
                            double mu, const StressModel& model, double t) {
  if (times.empty() || times.size() != F_history.size()) {
    throw std::invalid_argument("memory kernel needs a non-empty history with one field per time");
  }
  if (!(eps > 0.0) || !(mu > 0.0)) throw std::invalid_argument("eps and mu must be > 0");
  if (t < times.front() || t > times.back()) throw std::out_of_range("t lies outside the stored history");

  const double r = mu / eps;
  auto integrand = [&](const MatrixField& F) {
    MatrixField G = r * F;
    G -= apply_stress(model, F);
    return G;
  };
  auto weight = [&](double tau) { return std::exp(-(t - tau) / eps) / eps; };

  // Tail on (-inf, t0] against the constant extension: int w = e^{-(t - t0)/eps}.
  MatrixField G_prev = integrand(F_history[0]);
  MatrixField acc = std::exp(-(t - times[0]) / eps) * G_prev;
  MatrixField F_t = F_history[0];

  std::size_t k = 1;
  for (; k < times.size() && times[k] <= t; ++k) {
    const double h = times[k] - times[k - 1];
    MatrixField G = integrand(F_history[k]);
    acc.axpy(0.5 * h * weight(times[k - 1]), G_prev);
    acc.axpy(0.5 * h * weight(times[k]), G);
    G_prev = std::move(G);
    F_t = F_history[k];
  }
  if (k < times.size() && times[k - 1] < t) {
    // Partial last panel with linearly interpolated history.
    const double t0 = times[k - 1];
    const double theta = (t - t0) / (times[k] - t0);
    F_t = (1.0 - theta) * F_history[k - 1];
    F_t.axpy(theta, F_history[k]);
    const MatrixField G_t = integrand(F_t);
    const double h = t - t0;
    acc.axpy(0.5 * h * weight(t0), G_prev);
    acc.axpy(0.5 * h * weight(t), G_t);
  }

  MatrixField S = r * F_t;
  S -= acc;
  return S;
}

}  // namespace visco

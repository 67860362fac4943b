#include "visco/equilibrium_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>
#include <stdexcept>
#include <string>

#include "visco/errors.hpp"
#include "visco/spectral.hpp"

namespace visco {

void EquilConfig::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be > 0");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw std::invalid_argument("cfl_safety must lie in (0, 1]");
  model.validate();
}

EquilState equil_rhs(const EquilState& state, const EquilConfig& cfg) {
  if (!state.all_finite()) throw BlowUpError("non-finite equilibrium state", 0.0);
  const int d = state.dim();
  const MatrixField T = apply_stress(cfg.model, state.F_field());
  EquilState rate(state.grid());
  for (int i = 0; i < d; ++i) {
    for (int a = 0; a < d; ++a) {
      rate.F(i, a) = spectral_derivative(state.v(i), a);
      rate.v(i) += spectral_derivative(T(i, a), a);
    }
  }
  return rate;
}

EquilState equil_full_rhs(const EquilState& state, const EquilConfig& cfg) {
  EquilState rate = equil_rhs(state, cfg);
  for (int i = 0; i < state.dim(); ++i) rate.v(i).axpy(cfg.mu, spectral_laplacian(state.v(i)));
  return rate;
}

double equil_stable_dt(const EquilState& state, const EquilConfig& cfg) {
  const auto samples = state.F_field().samples();
  const double gamma = subchar_gamma(cfg.model, samples);
  return cfg.cfl_safety * 2.8 / (std::sqrt(gamma) * cfg.grid.k_max());
}

namespace {

// Nonlinear remainder of the tendencies once the linearization at F = 0 is split off:
// F_t = 0, v_t = div(T(F) - kappa F). Zero for the linear model.
EquilState remainder_rhs(const EquilState& state, const EquilConfig& cfg) {
  if (!state.all_finite()) throw BlowUpError("non-finite equilibrium state", 0.0);
  const int d = state.dim();
  EquilState rate(state.grid());
  if (cfg.model.kind == StressKind::Linear) return rate;
  MatrixField T = apply_stress(cfg.model, state.F_field());
  T.axpy(-cfg.model.kappa, state.F_field());
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < d; ++a) rate.v(i) += spectral_derivative(T(i, a), a);
  return rate;
}

// exp(tau L) for the linear part L: F_t = grad v, v_t = kappa div F + mu Lap v.
// Per Fourier mode and row i only the longitudinal combination G_i = (k/|k|) . F_i couples to v_i:
//   d/dt (G, v) = [[0, i q], [i kappa q, -mu |k|^2]] (G, v),  q = |k| (Nyquist dropped).
class LinearPropagator {
 public:
  LinearPropagator(const PeriodicGrid& grid, double kappa, double mu, double tau)
      : ft_(FourierTransform::get(grid)), unit_(ft_.spectrum_size()), blocks_(ft_.spectrum_size()) {
    using cd = std::complex<double>;
    const cd I(0.0, 1.0);
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      double q2 = 0.0;
      for (int a = 0; a < grid.dim; ++a) {
        const double k = ft_.is_nyquist(s, a) ? 0.0 : ft_.wavenumber(s, a);
        unit_[s][a] = k;
        q2 += k * k;
      }
      const double q = std::sqrt(q2);
      if (q > 0.0)
        for (int a = 0; a < grid.dim; ++a) unit_[s][a] /= q;
      const double k2 = ft_.wavenumber_squared(s);
      if (k2 == 0.0) {
        blocks_[s] = {1.0, 0.0, 0.0, 1.0};
        continue;
      }
      // M = [[0, i q], [i kappa q, -mu k2]]; eigenvalues l1, l2 with |l2| >= |l1|.
      const cd m01 = I * q, m10 = I * (kappa * q);
      const double m11 = -mu * k2;
      const cd half = 0.5 * m11;
      const cd det = kappa * q2;
      const cd delta = std::sqrt(half * half - det);
      const cd l2 = half - delta;
      const cd l1 = det / l2;
      Block e;
      if (std::abs((l2 - l1) * tau) < 1e-4) {
        // confluent eigenvalues: e^{s tau} [(1 + x^2/2) I + tau (1 + x^2/6)(M - s I)], x = delta tau
        const cd x2 = delta * delta * tau * tau;
        const cd es = std::exp(half * tau);
        const cd c0 = es * (1.0 + 0.5 * x2), c1 = es * tau * (1.0 + x2 / 6.0);
        e = {c0 - c1 * half, c1 * m01, c1 * m10, c0 + c1 * (m11 - half)};
      } else {
        const cd e1 = std::exp(l1 * tau), e2 = std::exp(l2 * tau);
        const cd inv = 1.0 / (l1 - l2);
        // (e1 (M - l2) - e2 (M - l1)) / (l1 - l2)
        const cd c1 = (e1 - e2) * inv;
        const cd c0 = (e2 * l1 - e1 * l2) * inv;
        e = {c0, c1 * m01, c1 * m10, c0 + c1 * m11};
      }
      blocks_[s] = e;
    }
  }

  EquilState apply(const EquilState& u) const {
    const int d = u.dim();
    std::vector<Spectrum> F(d * d), v(d);
    for (int c = 0; c < d * d; ++c) F[c] = ft_.forward(u.component(c));
    for (int i = 0; i < d; ++i) v[i] = ft_.forward(u.v(i));
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      const Block& e = blocks_[s];
      for (int i = 0; i < d; ++i) {
        std::complex<double> G = 0.0;
        for (int a = 0; a < d; ++a) G += unit_[s][a] * F[matrix_index(i, a, d)][s];
        const std::complex<double> G_new = e[0] * G + e[1] * v[i][s];
        v[i][s] = e[2] * G + e[3] * v[i][s];
        for (int a = 0; a < d; ++a) F[matrix_index(i, a, d)][s] += unit_[s][a] * (G_new - G);
      }
    }
    EquilState out(u.grid());
    for (int c = 0; c < d * d; ++c) out.component(c) = ft_.inverse(std::move(F[c]));
    for (int i = 0; i < d; ++i) out.v(i) = ft_.inverse(std::move(v[i]));
    return out;
  }

 private:
  using Block = std::array<std::complex<double>, 4>;
  const FourierTransform& ft_;
  std::vector<std::array<double, 3>> unit_;
  std::vector<Block> blocks_;
};

}  // namespace

EquilState ifrk4_step(const EquilState& u, const EquilConfig& cfg, double h, double t) {
  try {
    const LinearPropagator half(u.grid(), cfg.model.kappa, cfg.mu, 0.5 * h);
    const LinearPropagator full(u.grid(), cfg.model.kappa, cfg.mu, h);

    const EquilState k1 = remainder_rhs(u, cfg);
    EquilState a = u;
    a.axpy(0.5 * h, k1);
    const EquilState k2 = remainder_rhs(half.apply(a), cfg);

    EquilState b = half.apply(u);
    b.axpy(0.5 * h, k2);
    const EquilState k3 = remainder_rhs(b, cfg);

    EquilState c = full.apply(u);
    c.axpy(h, half.apply(k3));
    const EquilState k4 = remainder_rhs(c, cfg);

    EquilState mid = k2;
    mid += k3;
    EquilState next = full.apply(u);
    next.axpy(h / 6.0, full.apply(k1));
    next.axpy(h / 3.0, half.apply(mid));
    next.axpy(h / 6.0, k4);
    if (!next.all_finite()) throw BlowUpError("non-finite step", t);
    return next;
  } catch (const BlowUpError&) {
    throw BlowUpError("equilibrium solver blew up after t=" + std::to_string(t), t);
  }
}

EquilTrajectory run_equilibrium(const EquilState& init, const EquilConfig& cfg, int sample_every) {
  cfg.validate();
  if (!(init.grid() == cfg.grid)) throw std::invalid_argument("initial state is not on the configured grid");
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  const double dt = std::min(equil_stable_dt(init, cfg), cfg.t_final);
  const long steps = static_cast<long>(std::ceil(cfg.t_final / dt - 1e-12));

  EquilTrajectory traj;
  traj.config = cfg;
  traj.dt = dt;
  traj.times.push_back(0.0);
  traj.states.push_back(init);
  EquilState state = init;
  double t = 0.0;
  for (long n = 1; n <= steps; ++n) {
    const double h = (n == steps) ? cfg.t_final - t : dt;
    state = ifrk4_step(state, cfg, h, t);
    t = (n == steps) ? cfg.t_final : t + h;
    if (n % sample_every == 0 || n == steps) {
      traj.times.push_back(t);
      traj.states.push_back(state);
    }
  }
  return traj;
}

EquilTrajectory run_equilibrium_sampled(const EquilState& init, const EquilConfig& cfg,
                                        std::span<const double> sample_times, double max_dt) {
  cfg.validate();
  if (!(init.grid() == cfg.grid)) throw std::invalid_argument("initial state is not on the configured grid");
  if (sample_times.empty()) throw std::invalid_argument("no sample times");
  double dt_limit = equil_stable_dt(init, cfg);
  if (max_dt > 0.0) dt_limit = std::min(dt_limit, max_dt);

  EquilTrajectory traj;
  traj.config = cfg;
  traj.times.push_back(sample_times[0]);
  traj.states.push_back(init);
  EquilState state = init;
  for (std::size_t k = 1; k < sample_times.size(); ++k) {
    const double t0 = sample_times[k - 1];
    const double span = sample_times[k] - t0;
    if (!(span > 0.0)) throw std::invalid_argument("sample times must be strictly increasing");
    const long sub = static_cast<long>(std::ceil(span / dt_limit - 1e-12));
    const double h = span / static_cast<double>(sub);
    traj.dt = std::max(traj.dt, h);
    for (long n = 0; n < sub; ++n) state = ifrk4_step(state, cfg, h, t0 + n * h);
    traj.times.push_back(sample_times[k]);
    traj.states.push_back(state);
  }
  return traj;
}

MatrixField reconstruct_S_hat(const EquilState& state, const EquilConfig& cfg) {
  MatrixField S = apply_stress(cfg.model, state.F_field());
  S.axpy(cfg.mu, gradient(state.v_field()));
  return S;
}

VectorField dt_v_hat(const EquilState& state, const EquilConfig& cfg) {
  VectorField out(state.grid());
  const EquilState rate = equil_full_rhs(state, cfg);
  for (int i = 0; i < state.dim(); ++i) out(i) = rate.v(i);
  return out;
}

MatrixField dt_S_hat(const EquilState& state, const EquilConfig& cfg) {
  const MatrixField dtF = gradient(state.v_field());
  MatrixField out = apply_stress_jacobian(cfg.model, state.F_field(), dtF);
  out.axpy(cfg.mu, gradient(dt_v_hat(state, cfg)));
  return out;
}

VectorField dtt_v_hat(const EquilState& state, const EquilConfig& cfg) {
  const MatrixField dtF = gradient(state.v_field());
  VectorField out = divergence(apply_stress_jacobian(cfg.model, state.F_field(), dtF));
  out.axpy(cfg.mu, laplacian(dt_v_hat(state, cfg)));
  return out;
}

}  // namespace visco

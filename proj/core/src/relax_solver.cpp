#include "visco/relax_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "visco/errors.hpp"
#include "visco/spectral.hpp"

namespace visco {

void RelaxConfig::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("relaxation eps must be > 0");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be > 0");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw std::invalid_argument("cfl_safety must lie in (0, 1]");
  model.validate();
}

StateField relax_rhs(const StateField& state, const RelaxConfig& cfg) {
  if (!state.all_finite()) throw BlowUpError("non-finite relaxation state", 0.0);
  const int d = state.dim();
  const double inv_eps = 1.0 / cfg.eps;
  const double acoustic = cfg.mu / cfg.eps;
  const MatrixField T = apply_stress(cfg.model, state.F_field());

  StateField rate(state.grid());
  for (int i = 0; i < d; ++i) {
    for (int a = 0; a < d; ++a) {
      const ScalarField dv = spectral_derivative(state.v(i), a);
      rate.F(i, a) = dv;
      rate.v(i) += spectral_derivative(state.S(i, a), a);
      ScalarField& s = rate.S(i, a);
      s = acoustic * dv;
      s.axpy(-inv_eps, state.S(i, a));
      s.axpy(inv_eps, T(i, a));
    }
  }
  return rate;
}

double relax_stable_dt(double eps, double mu, double k_max, double cfl_safety) {
  const double damping_limit = 2.5 * eps;
  const double acoustic_limit = 2.8 / (std::sqrt(mu / eps) * k_max);
  return cfl_safety * std::min(damping_limit, acoustic_limit);
}

double stable_dt(const RelaxConfig& cfg) {
  return relax_stable_dt(cfg.eps, cfg.mu, cfg.grid.k_max(), cfg.cfl_safety);
}

StateField rk4_step(const StateField& state, const RelaxConfig& cfg, double dt, double t) {
  try {
    StateField k1 = relax_rhs(state, cfg);
    StateField stage = state;
    stage.axpy(0.5 * dt, k1);
    StateField k2 = relax_rhs(stage, cfg);
    stage = state;
    stage.axpy(0.5 * dt, k2);
    StateField k3 = relax_rhs(stage, cfg);
    stage = state;
    stage.axpy(dt, k3);
    StateField k4 = relax_rhs(stage, cfg);

    StateField next = state;
    next.axpy(dt / 6.0, k1);
    next.axpy(dt / 3.0, k2);
    next.axpy(dt / 3.0, k3);
    next.axpy(dt / 6.0, k4);
    if (!next.all_finite()) throw BlowUpError("non-finite step", t);
    return next;
  } catch (const BlowUpError&) {
    throw BlowUpError("relaxation solver blew up after t=" + std::to_string(t), t);
  }
}

namespace {

double f_high_mode_fraction(const StateField& s) {
  double worst = 0.0;
  for (int c = 0; c < s.dim() * s.dim(); ++c) worst = std::max(worst, high_mode_fraction(s.component(c)));
  return worst;
}

}  // namespace

RelaxTrajectory run_relax(const StateField& init, const RelaxConfig& cfg, int sample_every) {
  cfg.validate();
  if (!(init.grid() == cfg.grid)) throw std::invalid_argument("initial state is not on the configured grid");
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");

  const double dt = stable_dt(cfg);
  const long steps = static_cast<long>(std::ceil(cfg.t_final / dt - 1e-12));
  RelaxTrajectory traj;
  traj.config = cfg;
  traj.dt = dt;
  traj.times.push_back(0.0);
  traj.states.push_back(init);
  traj.max_high_mode_fraction = f_high_mode_fraction(init);

  StateField state = init;
  double t = 0.0;
  for (long n = 1; n <= steps; ++n) {
    const double h = (n == steps) ? cfg.t_final - t : dt;
    state = rk4_step(state, cfg, h, t);
    t = (n == steps) ? cfg.t_final : t + h;
    if (n % sample_every == 0 || n == steps) {
      traj.times.push_back(t);
      traj.states.push_back(state);
      traj.max_high_mode_fraction = std::max(traj.max_high_mode_fraction, f_high_mode_fraction(state));
    }
  }
  return traj;
}

RelaxTrajectory run_relax_sampled(const StateField& init, const RelaxConfig& cfg,
                                  std::span<const double> sample_times, double max_dt) {
  cfg.validate();
  if (!(init.grid() == cfg.grid)) throw std::invalid_argument("initial state is not on the configured grid");
  if (sample_times.empty()) throw std::invalid_argument("no sample times");
  double dt_limit = stable_dt(cfg);
  if (max_dt > 0.0) dt_limit = std::min(dt_limit, max_dt);

  RelaxTrajectory traj;
  traj.config = cfg;
  traj.times.push_back(sample_times[0]);
  traj.states.push_back(init);
  traj.max_high_mode_fraction = f_high_mode_fraction(init);

  StateField state = init;
  for (std::size_t k = 1; k < sample_times.size(); ++k) {
    const double t0 = sample_times[k - 1];
    const double span = sample_times[k] - t0;
    if (!(span > 0.0)) throw std::invalid_argument("sample times must be strictly increasing");
    const long sub = static_cast<long>(std::ceil(span / dt_limit - 1e-12));
    const double h = span / static_cast<double>(sub);
    traj.dt = std::max(traj.dt, h);
    for (long n = 0; n < sub; ++n) state = rk4_step(state, cfg, h, t0 + n * h);
    traj.times.push_back(sample_times[k]);
    traj.states.push_back(state);
    traj.max_high_mode_fraction = std::max(traj.max_high_mode_fraction, f_high_mode_fraction(state));
  }
  return traj;
}

StateField well_prepared_init(const MatrixField& F_hat0, const VectorField& v_hat0, const RelaxConfig& cfg) {
  if (!(F_hat0.grid() == cfg.grid) || !(v_hat0.grid() == cfg.grid)) {
    throw std::invalid_argument("equilibrium data is not on the configured grid");
  }
  MatrixField S = apply_stress(cfg.model, F_hat0);
  S.axpy(cfg.mu, gradient(v_hat0));
  return StateField(F_hat0, v_hat0, S);
}

std::vector<double> second_order_residual(const RelaxTrajectory& traj, const RelaxConfig& cfg) {
  const std::size_t n = traj.times.size();
  if (n < 3) throw std::invalid_argument("second-order residual needs at least 3 samples");
  const double h = traj.times[1] - traj.times[0];
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs((traj.times[k] - traj.times[k - 1]) - h) > 1e-9 * std::max(h, 1e-300)) {
      throw std::invalid_argument("second-order residual needs uniform sampling");
    }
  }
  const int d = cfg.grid.dim;
  std::vector<double> out;
  out.reserve(n - 2);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const StateField& prev = traj.states[k - 1];
    const StateField& cur = traj.states[k];
    const StateField& next = traj.states[k + 1];
    const VectorField divT = divergence(apply_stress(cfg.model, cur.F_field()));
    const VectorField lap = laplacian(cur.v_field());
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
      ScalarField r = (cfg.eps / (h * h)) * (next.v(i) - 2.0 * cur.v(i) + prev.v(i));
      r.axpy(0.5 / h, next.v(i) - prev.v(i));
      r -= divT(i);
      r.axpy(-cfg.mu, lap(i));
      norm2 += inner_product_l2(r, r);
    }
    out.push_back(std::sqrt(norm2));
  }
  return out;
}

}  // namespace visco

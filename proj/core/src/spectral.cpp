#include "visco/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <utility>

#include <fftw3.h>

namespace visco {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

const FourierTransform& FourierTransform::get(const PeriodicGrid& grid) {
  // The mutex is constructed first so that it outlives the cache.
  std::mutex& mutex = planner_mutex();
  static std::map<std::tuple<int, int, double>, std::unique_ptr<FourierTransform>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(grid.dim, grid.n_points, grid.length);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::unique_ptr<FourierTransform>(new FourierTransform(grid))).first;
  }
  return *it->second;
}

FourierTransform::FourierTransform(const PeriodicGrid& grid) : grid_(grid) {
  const int d = grid.dim;
  const int n = grid.n_points;
  const int half = n / 2 + 1;
  std::size_t count = static_cast<std::size_t>(half);
  for (int a = 0; a + 1 < d; ++a) count *= static_cast<std::size_t>(n);
  modes_.resize(count);
  for (std::size_t s = 0; s < count; ++s) {
    std::array<int, 3> m{0, 0, 0};
    std::size_t rest = s;
    m[d - 1] = static_cast<int>(rest % half);
    rest /= half;
    for (int a = d - 2; a >= 0; --a) {
      const int j = static_cast<int>(rest % n);
      rest /= n;
      m[a] = j <= n / 2 ? j : j - n;
    }
    modes_[s] = m;
  }

  int dims[3] = {n, n, n};
  double* in = fftw_alloc_real(grid.size());
  fftw_complex* out = fftw_alloc_complex(count);
  // Caller holds planner_mutex(); FFTW planning is not thread-safe.
  forward_plan_ = fftw_plan_dft_r2c(d, dims, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_plan_ = fftw_plan_dft_c2r(d, dims, out, in, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("FFTW planning failed");
}

FourierTransform::~FourierTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

double FourierTransform::wavenumber(std::size_t s, int axis) const noexcept {
  return 2.0 * std::numbers::pi / grid_.length * modes_[s][axis];
}

bool FourierTransform::is_nyquist(std::size_t s, int axis) const noexcept {
  return std::abs(modes_[s][axis]) == grid_.n_points / 2;
}

double FourierTransform::wavenumber_squared(std::size_t s) const noexcept {
  double k2 = 0.0;
  for (int a = 0; a < grid_.dim; ++a) k2 += wavenumber(s, a) * wavenumber(s, a);
  return k2;
}

Spectrum FourierTransform::forward(const ScalarField& f) const {
  if (!(f.grid() == grid_)) {
    throw std::invalid_argument("field does not match transform grid");
  }
  std::vector<double> in(f.values().begin(), f.values().end());
  Spectrum out(modes_.size());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

ScalarField FourierTransform::inverse(Spectrum spectrum) const {
  if (spectrum.size() != modes_.size()) throw std::invalid_argument("spectrum size mismatch");
  std::vector<double> out(grid_.size());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
  const double norm = 1.0 / static_cast<double>(grid_.size());
  for (double& x : out) x *= norm;
  return ScalarField(grid_, std::move(out));
}

namespace {

// (i k)^order for one axis.
std::complex<double> ik_power(double k, int order) {
  std::complex<double> r(1.0, 0.0);
  const std::complex<double> ik(0.0, k);
  for (int o = 0; o < order; ++o) r *= ik;
  return r;
}

}  // namespace

ScalarField multi_derivative(const ScalarField& f, const MultiIndex& gamma) {
  const PeriodicGrid& grid = f.grid();
  if (gamma.total() > 3) throw std::invalid_argument("multi-index order exceeds 3");
  for (int a = 0; a < 3; ++a) {
    if (gamma.orders[a] < 0) throw std::invalid_argument("negative derivative order");
    if (a >= grid.dim && gamma.orders[a] != 0) {
      throw std::out_of_range("multi-index differentiates an axis beyond the grid dimension");
    }
  }
  if (gamma.total() == 0) return f;
  const auto& ft = FourierTransform::get(grid);
  Spectrum spec = ft.forward(f);
  for (std::size_t s = 0; s < spec.size(); ++s) {
    std::complex<double> factor(1.0, 0.0);
    for (int a = 0; a < grid.dim; ++a) {
      const int order = gamma.orders[a];
      if (order == 0) continue;
      if (order % 2 == 1 && ft.is_nyquist(s, a)) {
        factor = 0.0;
        break;
      }
      factor *= ik_power(ft.wavenumber(s, a), order);
    }
    spec[s] *= factor;
  }
  return ft.inverse(std::move(spec));
}

ScalarField spectral_derivative(const ScalarField& f, int axis) {
  if (axis < 0 || axis >= f.grid().dim) throw std::out_of_range("derivative axis out of range");
  MultiIndex g;
  g.orders[axis] = 1;
  return multi_derivative(f, g);
}

ScalarField spectral_laplacian(const ScalarField& f) {
  const PeriodicGrid& grid = f.grid();
  const auto& ft = FourierTransform::get(grid);
  Spectrum spec = ft.forward(f);
  for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= -ft.wavenumber_squared(s);
  return ft.inverse(std::move(spec));
}

double inner_product_l2(const ScalarField& f, const ScalarField& g) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("inner product of fields on different grids");
  double sum = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) sum += f[p] * g[p];
  return sum * f.grid().cell_volume();
}

double integrate(const ScalarField& f) {
  double sum = 0.0;
  for (double x : f.values()) sum += x;
  return sum * f.grid().cell_volume();
}

double field_linf(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

double high_mode_fraction(const ScalarField& f) {
  const auto& ft = FourierTransform::get(f.grid());
  const Spectrum spec = ft.forward(f);
  const int cutoff = f.grid().n_points / 3;
  const int last = f.grid().dim - 1;
  double total = 0.0, high = 0.0;
  for (std::size_t s = 0; s < spec.size(); ++s) {
    // Half-spectrum entries off the last-axis edges stand for a conjugate pair.
    const int m_last = ft.mode(s)[last];
    const double weight = (m_last == 0 || m_last == f.grid().n_points / 2) ? 1.0 : 2.0;
    const double e = weight * std::norm(spec[s]);
    total += e;
    bool is_high = false;
    for (int a = 0; a < f.grid().dim; ++a) is_high = is_high || std::abs(ft.mode(s)[a]) > cutoff;
    if (is_high) high += e;
  }
  return total > 0.0 ? high / total : 0.0;
}

}  // namespace visco

#include "visco/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace visco {

PeriodicGrid::PeriodicGrid(int dim_, int n_points_, double length_)
    : dim(dim_), n_points(n_points_), length(length_) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (n_points < 8 || (n_points & (n_points - 1)) != 0) {
    throw std::invalid_argument("grid size N must be a power of two >= 8");
  }
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("grid length must be > 0");
}

double PeriodicGrid::cell_volume() const noexcept { return std::pow(dx(), dim); }

std::size_t PeriodicGrid::size() const noexcept {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n_points);
  return s;
}

double PeriodicGrid::k_max() const noexcept {
  return 0.5 * n_points * (2.0 * std::numbers::pi / length);
}

std::array<int, 3> PeriodicGrid::multi_index(std::size_t index) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(index % n_points);
    index /= n_points;
  }
  return idx;
}

double PeriodicGrid::coordinate(std::size_t index, int axis) const noexcept {
  return multi_index(index)[axis] * dx();
}

ScalarField::ScalarField(const PeriodicGrid& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const PeriodicGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
}

namespace {
void check_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
}
}  // namespace

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t p = 0; p < values_.size(); ++p) values_[p] += o.values_[p];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t p = 0; p < values_.size(); ++p) values_[p] -= o.values_[p];
  return *this;
}

ScalarField& ScalarField::operator*=(double c) {
  for (double& x : values_) x *= c;
  return *this;
}

ScalarField& ScalarField::axpy(double c, const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t p = 0; p < values_.size(); ++p) values_[p] += c * o.values_[p];
  return *this;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  check_same_grid(a, b);
  ScalarField r(a.grid());
  for (std::size_t p = 0; p < a.size(); ++p) r[p] = a[p] * b[p];
  return r;
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double ScalarField::mean() const noexcept {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

std::vector<MultiIndex> MultiIndex::up_to(int d, int max_order) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= max_order; ++total) {
    for (int g0 = total; g0 >= 0; --g0) {
      if (d == 1) {
        if (g0 == total) out.push_back({{g0, 0, 0}});
        continue;
      }
      for (int g1 = total - g0; g1 >= 0; --g1) {
        const int g2 = total - g0 - g1;
        if (d == 2 && g2 != 0) continue;
        out.push_back({{g0, g1, g2}});
      }
    }
  }
  return out;
}

}  // namespace visco

#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace visco {

/// Uniform periodic grid on the torus [0, L)^d with N points per axis.
/// Points are stored row-major: axis 0 outermost.
struct PeriodicGrid {
  int dim = 1;
  int n_points = 64;
  double length = 2.0 * std::numbers::pi;

  PeriodicGrid() = default;
  /// Throws std::invalid_argument unless dim in {1,2,3}, N >= 8 a power of two, L > 0.
  PeriodicGrid(int dim, int n_points, double length = 2.0 * std::numbers::pi);

  double dx() const noexcept { return length / n_points; }
  double cell_volume() const noexcept;
  std::size_t size() const noexcept;
  /// Largest resolved wavenumber (N/2)(2 pi / L).
  double k_max() const noexcept;
  /// Coordinate of grid point `index` along `axis`.
  double coordinate(std::size_t index, int axis) const noexcept;
  std::array<int, 3> multi_index(std::size_t index) const noexcept;

  bool operator==(const PeriodicGrid&) const = default;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const PeriodicGrid& grid, double value = 0.0);
  ScalarField(const PeriodicGrid& grid, std::vector<double> values);

  template <typename Fn>
  static ScalarField from_function(const PeriodicGrid& grid, Fn&& fn) {
    ScalarField f(grid);
    for (std::size_t p = 0; p < f.size(); ++p) {
      std::array<double, 3> x{};
      for (int a = 0; a < grid.dim; ++a) x[a] = grid.coordinate(p, a);
      f.values_[p] = fn(x);
    }
    return f;
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t p) noexcept { return values_[p]; }
  double operator[](std::size_t p) const noexcept { return values_[p]; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double c);
  /// this += c * o
  ScalarField& axpy(double c, const ScalarField& o);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }
  /// Pointwise product.
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);

  bool all_finite() const noexcept;
  double mean() const noexcept;

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

/// Derivative orders per axis; |gamma| <= 3.
struct MultiIndex {
  std::array<int, 3> orders{0, 0, 0};

  int total() const noexcept { return orders[0] + orders[1] + orders[2]; }
  /// All multi-indices in d dimensions with |gamma| <= max_order, ordered by total order.
  static std::vector<MultiIndex> up_to(int d, int max_order);
};

}  // namespace visco

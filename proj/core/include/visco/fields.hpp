#pragma once

#include <concepts>
#include <cstddef>
#include <vector>

#include "visco/grid.hpp"
#include "visco/stress_models.hpp"

namespace visco {

/// A fixed number of scalar components sharing one grid, with the vector-space
/// operations needed by explicit time stepping.
class FieldBundle {
 public:
  FieldBundle() = default;
  FieldBundle(const PeriodicGrid& grid, int components);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim; }
  int component_count() const noexcept { return static_cast<int>(comps_.size()); }
  ScalarField& component(int c) { return comps_[c]; }
  const ScalarField& component(int c) const { return comps_[c]; }
  std::vector<ScalarField>& components() noexcept { return comps_; }
  const std::vector<ScalarField>& components() const noexcept { return comps_; }

  FieldBundle& operator+=(const FieldBundle& o);
  FieldBundle& operator-=(const FieldBundle& o);
  FieldBundle& operator*=(double c);
  FieldBundle& axpy(double c, const FieldBundle& o);

  bool all_finite() const noexcept;
  /// Sum of squared L2 norms of every component.
  double norm_l2_squared() const;
  double max_abs() const noexcept;

 protected:
  void check_compatible(const FieldBundle& o) const;

  PeriodicGrid grid_;
  std::vector<ScalarField> comps_;
};

/// d x d matrix of scalar fields, component (i, alpha) stored at matrix_index(i, alpha, d).
class MatrixField : public FieldBundle {
 public:
  MatrixField() = default;
  explicit MatrixField(const PeriodicGrid& grid) : FieldBundle(grid, grid.dim * grid.dim) {}

  ScalarField& operator()(int i, int alpha) { return comps_[matrix_index(i, alpha, dim())]; }
  const ScalarField& operator()(int i, int alpha) const {
    return comps_[matrix_index(i, alpha, dim())];
  }

  SmallMatrix at(std::size_t p) const;
  void set(std::size_t p, const SmallMatrix& m);
  /// All pointwise values, e.g. as samples for subchar_gamma.
  std::vector<SmallMatrix> samples() const;
};

class VectorField : public FieldBundle {
 public:
  VectorField() = default;
  explicit VectorField(const PeriodicGrid& grid) : FieldBundle(grid, grid.dim) {}

  ScalarField& operator()(int i) { return comps_[i]; }
  const ScalarField& operator()(int i) const { return comps_[i]; }
};

/// Relaxation state (F, v, S): components laid out as F (d^2), v (d), S (d^2).
class StateField : public FieldBundle {
 public:
  StateField() = default;
  explicit StateField(const PeriodicGrid& grid);
  StateField(const MatrixField& F, const VectorField& v, const MatrixField& S);

  ScalarField& F(int i, int alpha) { return comps_[matrix_index(i, alpha, dim())]; }
  const ScalarField& F(int i, int alpha) const { return comps_[matrix_index(i, alpha, dim())]; }
  ScalarField& v(int i) { return comps_[dim() * dim() + i]; }
  const ScalarField& v(int i) const { return comps_[dim() * dim() + i]; }
  ScalarField& S(int i, int alpha) { return comps_[dim() * dim() + dim() + matrix_index(i, alpha, dim())]; }
  const ScalarField& S(int i, int alpha) const {
    return comps_[dim() * dim() + dim() + matrix_index(i, alpha, dim())];
  }

  MatrixField F_field() const;
  VectorField v_field() const;
  MatrixField S_field() const;
};

/// Equilibrium state (F_hat, v_hat): components laid out as F (d^2), v (d).
class EquilState : public FieldBundle {
 public:
  EquilState() = default;
  explicit EquilState(const PeriodicGrid& grid);
  EquilState(const MatrixField& F, const VectorField& v);

  ScalarField& F(int i, int alpha) { return comps_[matrix_index(i, alpha, dim())]; }
  const ScalarField& F(int i, int alpha) const { return comps_[matrix_index(i, alpha, dim())]; }
  ScalarField& v(int i) { return comps_[dim() * dim() + i]; }
  const ScalarField& v(int i) const { return comps_[dim() * dim() + i]; }

  MatrixField F_field() const;
  VectorField v_field() const;
};

template <std::derived_from<FieldBundle> Bundle>
Bundle operator*(double c, Bundle b) {
  b *= c;
  return b;
}

/// Pointwise T(F).
MatrixField apply_stress(const StressModel& model, const MatrixField& F);

/// Pointwise directional derivative dT(F)[G]: sum_{j beta} dT_{i alpha}/dF_{j beta}(F) G_{j beta}.
MatrixField apply_stress_jacobian(const StressModel& model, const MatrixField& F, const MatrixField& G);

/// (grad v)_{i alpha} = d_alpha v_i
MatrixField gradient(const VectorField& v);

/// (div M)_i = sum_alpha d_alpha M_{i alpha}
VectorField divergence(const MatrixField& M);

VectorField laplacian(const VectorField& v);

}  // namespace visco

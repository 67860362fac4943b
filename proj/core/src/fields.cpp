#include "visco/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "visco/spectral.hpp"

namespace visco {

FieldBundle::FieldBundle(const PeriodicGrid& grid, int components)
    : grid_(grid), comps_(static_cast<std::size_t>(components), ScalarField(grid)) {}

void FieldBundle::check_compatible(const FieldBundle& o) const {
  if (!(grid_ == o.grid_) || comps_.size() != o.comps_.size()) {
    throw std::invalid_argument("field bundles differ in grid or component count");
  }
}

FieldBundle& FieldBundle::operator+=(const FieldBundle& o) {
  check_compatible(o);
  for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] += o.comps_[c];
  return *this;
}

FieldBundle& FieldBundle::operator-=(const FieldBundle& o) {
  check_compatible(o);
  for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] -= o.comps_[c];
  return *this;
}

FieldBundle& FieldBundle::operator*=(double c) {
  for (auto& f : comps_) f *= c;
  return *this;
}

FieldBundle& FieldBundle::axpy(double c, const FieldBundle& o) {
  check_compatible(o);
  for (std::size_t k = 0; k < comps_.size(); ++k) comps_[k].axpy(c, o.comps_[k]);
  return *this;
}

bool FieldBundle::all_finite() const noexcept {
  return std::all_of(comps_.begin(), comps_.end(), [](const ScalarField& f) { return f.all_finite(); });
}

double FieldBundle::norm_l2_squared() const {
  double s = 0.0;
  for (const auto& f : comps_) s += inner_product_l2(f, f);
  return s;
}

double FieldBundle::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& f : comps_) m = std::max(m, field_linf(f));
  return m;
}

SmallMatrix MatrixField::at(std::size_t p) const {
  const int d = dim();
  SmallMatrix m(d, d);
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < d; ++i) m(i, a) = comps_[matrix_index(i, a, d)][p];
  return m;
}

void MatrixField::set(std::size_t p, const SmallMatrix& m) {
  const int d = dim();
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < d; ++i) comps_[matrix_index(i, a, d)][p] = m(i, a);
}

std::vector<SmallMatrix> MatrixField::samples() const {
  std::vector<SmallMatrix> out;
  out.reserve(grid_.size());
  for (std::size_t p = 0; p < grid_.size(); ++p) out.push_back(at(p));
  return out;
}

StateField::StateField(const PeriodicGrid& grid) : FieldBundle(grid, 2 * grid.dim * grid.dim + grid.dim) {}

StateField::StateField(const MatrixField& F, const VectorField& v, const MatrixField& S)
    : StateField(F.grid()) {
  if (!(v.grid() == grid_) || !(S.grid() == grid_)) throw std::invalid_argument("state parts on different grids");
  const int m = dim() * dim();
  for (int c = 0; c < m; ++c) comps_[c] = F.component(c);
  for (int c = 0; c < dim(); ++c) comps_[m + c] = v.component(c);
  for (int c = 0; c < m; ++c) comps_[m + dim() + c] = S.component(c);
}

MatrixField StateField::F_field() const {
  MatrixField F(grid_);
  for (int c = 0; c < dim() * dim(); ++c) F.component(c) = comps_[c];
  return F;
}

VectorField StateField::v_field() const {
  VectorField v(grid_);
  for (int c = 0; c < dim(); ++c) v.component(c) = comps_[dim() * dim() + c];
  return v;
}

MatrixField StateField::S_field() const {
  MatrixField S(grid_);
  for (int c = 0; c < dim() * dim(); ++c) S.component(c) = comps_[dim() * dim() + dim() + c];
  return S;
}

EquilState::EquilState(const PeriodicGrid& grid) : FieldBundle(grid, grid.dim * grid.dim + grid.dim) {}

EquilState::EquilState(const MatrixField& F, const VectorField& v) : EquilState(F.grid()) {
  if (!(v.grid() == grid_)) throw std::invalid_argument("state parts on different grids");
  const int m = dim() * dim();
  for (int c = 0; c < m; ++c) comps_[c] = F.component(c);
  for (int c = 0; c < dim(); ++c) comps_[m + c] = v.component(c);
}

MatrixField EquilState::F_field() const {
  MatrixField F(grid_);
  for (int c = 0; c < dim() * dim(); ++c) F.component(c) = comps_[c];
  return F;
}

VectorField EquilState::v_field() const {
  VectorField v(grid_);
  for (int c = 0; c < dim(); ++c) v.component(c) = comps_[dim() * dim() + c];
  return v;
}

MatrixField apply_stress(const StressModel& model, const MatrixField& F) {
  MatrixField T(F.grid());
  if (model.kind == StressKind::Linear) {
    for (int c = 0; c < F.component_count(); ++c) T.component(c) = model.kappa * F.component(c);
    return T;
  }
  for (std::size_t p = 0; p < F.grid().size(); ++p) T.set(p, stress_eval(model, F.at(p)));
  return T;
}

MatrixField apply_stress_jacobian(const StressModel& model, const MatrixField& F, const MatrixField& G) {
  const int d = F.dim();
  MatrixField out(F.grid());
  if (model.kind == StressKind::Linear) {
    for (int c = 0; c < d * d; ++c) out.component(c) = model.kappa * G.component(c);
    return out;
  }
  for (std::size_t p = 0; p < F.grid().size(); ++p) {
    const JacobianTensor J = stress_jacobian(model, F.at(p));
    const SmallMatrix g = G.at(p);
    SmallMatrix r = SmallMatrix::Zero(d, d);
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < d; ++i)
        for (int b = 0; b < d; ++b)
          for (int j = 0; j < d; ++j) r(i, a) += J(i, a, j, b) * g(j, b);
    out.set(p, r);
  }
  return out;
}

MatrixField gradient(const VectorField& v) {
  const int d = v.dim();
  MatrixField g(v.grid());
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < d; ++a) g(i, a) = spectral_derivative(v(i), a);
  return g;
}

VectorField divergence(const MatrixField& M) {
  const int d = M.dim();
  VectorField out(M.grid());
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < d; ++a) out(i) += spectral_derivative(M(i, a), a);
  return out;
}

VectorField laplacian(const VectorField& v) {
  VectorField out(v.grid());
  for (int i = 0; i < v.dim(); ++i) out(i) = spectral_laplacian(v(i));
  return out;
}

}  // namespace visco

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "visco/grid.hpp"

namespace visco {

using Spectrum = std::vector<std::complex<double>>;

/// Real-to-complex (half-spectrum) discrete Fourier transform on a periodic grid.
///
/// Instances are shared per (dim, N, L) and immutable once built; forward() and
/// inverse() may be called concurrently from several threads.
class FourierTransform {
 public:
  static const FourierTransform& get(const PeriodicGrid& grid);

  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t spectrum_size() const noexcept { return modes_.size(); }

  /// Integer mode numbers per axis of spectral entry s (signed, in [-N/2, N/2]).
  const std::array<int, 3>& mode(std::size_t s) const noexcept { return modes_[s]; }
  /// Physical wavenumber 2 pi m / L of spectral entry s along axis.
  double wavenumber(std::size_t s, int axis) const noexcept;
  /// True when entry s sits on the Nyquist index along axis.
  bool is_nyquist(std::size_t s, int axis) const noexcept;
  double wavenumber_squared(std::size_t s) const noexcept;

  /// Unnormalized forward transform.
  Spectrum forward(const ScalarField& f) const;
  /// Inverse transform including the 1/N^d normalization.
  ScalarField inverse(Spectrum spectrum) const;

 private:
  explicit FourierTransform(const PeriodicGrid& grid);

  PeriodicGrid grid_;
  std::vector<std::array<int, 3>> modes_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Spectral first derivative along axis (0-based). Nyquist mode dropped.
ScalarField spectral_derivative(const ScalarField& f, int axis);

/// Mixed derivative d_gamma computed in a single Fourier pass.
/// Nyquist entries are dropped along every axis differentiated an odd number of times.
ScalarField multi_derivative(const ScalarField& f, const MultiIndex& gamma);

/// Spectral Laplacian.
ScalarField spectral_laplacian(const ScalarField& f);

/// Rectangle-rule L2 inner product sum f g dx^d.
double inner_product_l2(const ScalarField& f, const ScalarField& g);

/// Rectangle-rule integral of f.
double integrate(const ScalarField& f);

double field_linf(const ScalarField& f);

/// Fraction of spectral energy carried by modes with |m| > N/3 on some axis.
/// Used to monitor aliasing of the nonlinear stress.
double high_mode_fraction(const ScalarField& f);

}  // namespace visco

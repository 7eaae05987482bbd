#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace nssl {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Periodic box with a real-to-complex Fourier layout.
///
/// Physical samples are stored row-major with axis 0 slowest; sample i on
/// axis j sits at x_j = i * L_j / n_j. Spectral coefficients use the r2c
/// half layout: the last axis keeps indices 0..n/2, every other axis keeps
/// all n indices. The forward transform is normalized so that the k = 0
/// coefficient equals the mean.
///
/// Grids are cheap to copy; copies share wavenumber tables and FFT plans.
class Grid {
 public:
  Grid(std::vector<int> dims, std::vector<double> lengths,
       double dealias_fraction = 2.0 / 3.0);

  /// n^ndim box of side `length`.
  static Grid cube(int ndim, int n, double length = kTwoPi,
                   double dealias_fraction = 2.0 / 3.0);

  int ndim() const;
  int dim(int axis) const;
  const std::vector<int>& dims() const;
  double length(int axis) const;
  const std::vector<double>& lengths() const;
  double spacing(int axis) const;
  double min_spacing() const;
  double volume() const;
  double cell_volume() const;
  double dealias_fraction() const;

  std::size_t size() const;
  std::size_t spectral_size() const;
  int spectral_dim(int axis) const;

  /// Signed alias of index m on `axis` in (-n/2, n/2]; the Nyquist index maps to +n/2.
  int signed_mode(int axis, int m) const;
  bool is_nyquist(int axis, int m) const;
  double wavenumber(int axis, int m) const;

  /// Per-coefficient tables, each of length spectral_size().
  /// k(axis) is the first-derivative wavenumber (zero on Nyquist planes).
  std::span<const double> k(int axis) const;
  std::span<const double> k_squared() const;
  std::span<const int> mode(int axis) const;
  /// Multiplicity of each stored coefficient in the full spectrum (1 or 2).
  std::span<const double> parseval_weight() const;
  std::span<const unsigned char> dealias_mask() const;

  double coord(int axis, int i) const { return i * spacing(axis); }
  std::size_t linear_index(std::span<const int> idx) const;
  /// Storage index of the full-spectrum mode with signed indices `modes`
  /// plus whether the stored value must be conjugated.
  std::pair<std::size_t, bool> spectral_index(std::span<const int> modes) const;

  void forward(std::span<const double> in, std::span<cplx> out) const;
  void inverse(std::span<const cplx> in, std::span<double> out) const;

  bool same_shape(const Grid& other) const;
  bool operator==(const Grid& other) const { return same_shape(other); }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace nssl

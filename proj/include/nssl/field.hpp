#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nssl/grid.hpp"

namespace nssl {

/// Real samples of an ncomp-component field, component-major then row-major.
class PhysicalField {
 public:
  PhysicalField(Grid grid, int ncomp);
  PhysicalField(Grid grid, int ncomp, std::vector<double> data);

  const Grid& grid() const { return grid_; }
  int ncomp() const { return ncomp_; }
  std::size_t points() const { return grid_.size(); }

  std::span<double> component(int c);
  std::span<const double> component(int c) const;
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  PhysicalField& operator+=(const PhysicalField& o);
  PhysicalField& operator-=(const PhysicalField& o);
  PhysicalField& operator*=(double s);

 private:
  Grid grid_;
  int ncomp_;
  std::vector<double> data_;
};

/// Fourier coefficients of a real field in the grid's r2c layout.
class SpectralField {
 public:
  SpectralField(Grid grid, int ncomp);
  SpectralField(Grid grid, int ncomp, std::vector<cplx> coeffs);

  const Grid& grid() const { return grid_; }
  int ncomp() const { return ncomp_; }
  std::size_t modes() const { return grid_.spectral_size(); }

  std::span<cplx> component(int c);
  std::span<const cplx> component(int c) const;
  std::span<cplx> data() { return coeffs_; }
  std::span<const cplx> data() const { return coeffs_; }

  /// Coefficient of the full-spectrum mode with the given signed indices.
  cplx coeff(int c, std::span<const int> modes) const;
  cplx mean(int c) const { return component(c)[0]; }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o);

  SpectralField component_field(int c) const;

 private:
  Grid grid_;
  int ncomp_;
  std::vector<cplx> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

SpectralField forward(const PhysicalField& f);
PhysicalField inverse(const SpectralField& f);

/// Forward transform of raw samples; throws ConfigError on shape mismatch.
SpectralField transform(const Grid& grid, int ncomp, std::span<const double> samples);

/// Evaluates fn(x, out) at every grid point; out receives ncomp values.
using PointFunction = std::function<void(const double* x, double* out)>;
PhysicalField sample(const Grid& grid, int ncomp, const PointFunction& fn);

/// Stack scalar/vector fields into one multi-component field.
SpectralField stack(std::span<const SpectralField> parts);
PhysicalField stack(std::span<const PhysicalField> parts);

}  // namespace nssl

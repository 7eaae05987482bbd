#pragma once

#include <array>
#include <span>
#include <vector>

#include "nssl/grid.hpp"

namespace nssl {

/// Periodic 4-point (cubic Lagrange) tensor-product interpolation on a grid.
/// One stencil evaluation is shared across any number of sample arrays.
class CubicInterpolator {
 public:
  explicit CubicInterpolator(Grid grid);

  const Grid& grid() const { return grid_; }

  /// Interpolates every array in `fields` at point x (ndim coordinates);
  /// writes one value per field into out.
  void eval(std::span<const std::span<const double>> fields, const double* x, double* out) const;
  double eval(std::span<const double> field, const double* x) const;

 private:
  Grid grid_;
};

/// Convenience: one span per component of a component-major sample array.
std::vector<std::span<const double>> component_spans(std::span<const double> data,
                                                     std::size_t points, int ncomp);

}  // namespace nssl

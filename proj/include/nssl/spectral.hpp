#pragma once

#include "nssl/field.hpp"

// Differential operators, projections and solves on periodic spectral fields.
// Every operator is a pure map returning a new field.

namespace nssl {

/// Spectral partial derivative along `axis`, applied to every component.
SpectralField derivative(const SpectralField& f, int axis);

/// Gradient of a scalar. ncomp_out defaults to grid.ndim(); on a 2D grid
/// ncomp_out = 3 appends a zero third component.
SpectralField gradient(const SpectralField& scalar, int ncomp_out = -1);

/// Velocity gradient tensor: component i*ndim + j holds d_j v_i.
SpectralField gradient_tensor(const SpectralField& v);

/// Divergence over the first min(ncomp, ndim) components (horizontal
/// divergence for a three-component field on a 2D grid).
SpectralField divergence(const SpectralField& v);

SpectralField laplacian(const SpectralField& f);

/// Leray projection u - k (k.u)/|k|^2 on each nonzero mode. On a 2D grid a
/// three-component field has only its horizontal part projected.
SpectralField leray_project(const SpectralField& u);

/// Complement of leray_project: the gradient part k (k.u)/|k|^2.
SpectralField gradient_part(const SpectralField& u);

/// Solves Lap(u) = f with zero mean. Throws InconsistentDataError if
/// |mean(f)| exceeds mean_tol times the RMS of f.
SpectralField poisson_solve(const SpectralField& f, double mean_tol = 1e-12);

/// Gaussian multiplier exp(-eps^2 |k|^2 / 2).
SpectralField mollify(const SpectralField& f, double epsilon);

/// Heat semigroup exp(t Lap).
SpectralField heat_flow(const SpectralField& f, double t);

/// Zeroes every mode outside the grid's dealiasing mask.
SpectralField dealias(SpectralField f);
void dealias_inplace(SpectralField& f);

/// d_1 v_2 - d_2 v_1.
SpectralField vorticity2d(const SpectralField& v);

/// Embeds a field on an (n0,n1) 2D grid as an x3-independent field on a
/// 3D grid with matching horizontal shape.
SpectralField extend_to_3d(const SpectralField& f2d, const Grid& grid3d);

/// Replicates 2D physical samples along x3.
PhysicalField extend_to_3d(const PhysicalField& f2d, const Grid& grid3d);

/// V * sum_k w_k |k|^(2 order) |c_k|^2 summed over components: the squared
/// L2 norm of the order-th gradient (order 0 gives the L2 norm itself).
double gradient_l2_norm_sq(const SpectralField& f, int order = 0);
double l2_norm_sq(const SpectralField& f);

/// Max over grid points of |spectral divergence|.
double max_divergence(const SpectralField& v);

}  // namespace nssl

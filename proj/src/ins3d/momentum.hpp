#pragma once

#include <vector>

#include "nssl/ins3d.hpp"

// Shared pieces of the direct and Picard perturbation solvers.

namespace nssl::detail {

PhysicalField to_physical(const SpectralField& f, bool dealias);

/// v2d + w on the 3D grid from physical samples of w.
PhysicalField full_velocity(const BackgroundSamples& bg, const PhysicalField& w);

struct ExplicitPart {
  SpectralField g;  // right side without the -h w_t term
  double cfl = 0.0;
};

/// -a.grad w - h (b.grad w) - (1+h) w_h.grad_h v2d - h v2d_t - h v2d_h.grad_h v2d,
/// dealiased. b may be null (treated as zero).
ExplicitPart explicit_part(const SpectralField& w, const PhysicalField& a, const PhysicalField* b,
                           const PhysicalField& h, const BackgroundSamples& bg, double dt,
                           bool dealias);

struct MomentumSolve {
  SpectralField w_t, r, grad_q;
  InnerStats stats;
};

/// Fixed point w_t = Lap w + P(g - h w_t). r = w_t - Lap w.
MomentumSolve solve_momentum(const SpectralField& g, const SpectralField& w,
                             const PhysicalField& h, const SpectralField* guess,
                             const Ins3dOptions& opt);

/// Per-mode e^{-|k|^2 dt}, phi1 and phi2 of -|k|^2 dt.
void etd_factors(const Grid& g, double dt, std::vector<double>& e, std::vector<double>& p1,
                 std::vector<double>& p2);

/// w <- e w + dt (p1 r + p2 (r - r_prev)); exponential Euler without r_prev.
void etd_advance(SpectralField& w, const SpectralField& r, const SpectralField* r_prev,
                 std::span<const double> e, std::span<const double> p1,
                 std::span<const double> p2, double dt);

void require_finite(const SpectralField& f, const char* what, long step);

double max_abs(std::span<const double> x);

}  // namespace nssl::detail

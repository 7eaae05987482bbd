#pragma once

#include <functional>
#include <vector>

#include "nssl/field.hpp"

namespace nssl {

/// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2, stable near 0.
double phi1(double z);
double phi2(double z);

struct StokesResult {
  double t = 0.0;
  SpectralField u;
  SpectralField gradQ;
  SpectralField u_t;
};

/// Forcing sampled at time t; an empty function means f = 0.
using TimeForcing = std::function<SpectralField(double t)>;

struct StokesTrajectory {
  std::vector<StokesResult> steps;  // steps[0] is the initial state
  /// Cumulative 2 * int_0^t ||grad u||^2, one entry per step.
  std::vector<double> dissipation;
};

/// Advances u_t - Lap u + grad Q = f, div u = 0 from u0 with an exponential
/// integrator that is exact for forcing linear in time on each step. u0 is
/// projected first. Records u, grad Q = (I-P) f and u_t = Lap u + P f.
StokesTrajectory stokes_solve(const SpectralField& u0, const TimeForcing& f, double dt,
                              int nsteps);

}  // namespace nssl

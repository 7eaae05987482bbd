#include "nssl/stokes.hpp"

#include <cmath>
#include <string>

#include "nssl/error.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

double phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 0.1) {
    // Taylor series; the truncation error is below 1e-15 relative here.
    double term = 0.5, sum = 0.5;
    for (int n = 3; n < 12; ++n) {
      term *= z / n;
      sum += term;
    }
    return sum;
  }
  return (std::expm1(z) - z) / (z * z);
}

namespace {

void check_finite(const SpectralField& u, int step) {
  for (const cplx& c : u.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw NumericalError("stokes: non-finite coefficient at step " + std::to_string(step));
}

StokesResult make_result(double t, const SpectralField& u, const SpectralField* f) {
  StokesResult r{t, u, SpectralField(u.grid(), u.ncomp()), laplacian(u)};
  if (f) {
    r.gradQ = gradient_part(*f);
    r.u_t += leray_project(*f);
  }
  return r;
}

}  // namespace

StokesTrajectory stokes_solve(const SpectralField& u0, const TimeForcing& f, double dt,
                              int nsteps) {
  if (!(dt > 0.0)) throw ConfigError("stokes: dt must be positive");
  if (nsteps < 0) throw ConfigError("stokes: nsteps must be >= 0");
  const Grid& g = u0.grid();
  const auto k2 = g.k_squared();
  const auto w = g.parseval_weight();
  const std::size_t ns = g.spectral_size();

  StokesTrajectory traj;
  SpectralField u = leray_project(u0);
  SpectralField fn = f ? leray_project(f(0.0)) : SpectralField(g, u.ncomp());
  {
    SpectralField raw = f ? f(0.0) : SpectralField(g, u.ncomp());
    traj.steps.push_back(make_result(0.0, u, f ? &raw : nullptr));
  }
  traj.dissipation.push_back(0.0);

  for (int n = 0; n < nsteps; ++n) {
    const double t1 = (n + 1) * dt;
    SpectralField raw1 = f ? f(t1) : SpectralField(g, u.ncomp());
    SpectralField f1 = f ? leray_project(raw1) : SpectralField(g, u.ncomp());
    double diss = 0.0;
    const double grad0 = gradient_l2_norm_sq(u, 1);
    for (int c = 0; c < u.ncomp(); ++c) {
      auto uc = u.component(c);
      auto a = fn.component(c);
      auto b = f1.component(c);
      for (std::size_t s = 0; s < ns; ++s) {
        const double z = -k2[s] * dt;
        // With f = 0 the dissipated energy on a mode is exactly
        // |u|^2 (1 - e^{-2|k|^2 dt}).
        if (!f) diss -= w[s] * std::norm(uc[s]) * std::expm1(2.0 * z);
        uc[s] = std::exp(z) * uc[s] + dt * (phi1(z) * a[s] + phi2(z) * (b[s] - a[s]));
      }
    }
    check_finite(u, n + 1);
    if (f)
      diss = dt * (grad0 + gradient_l2_norm_sq(u, 1));
    else
      diss *= g.volume();
    traj.dissipation.push_back(traj.dissipation.back() + diss);
    traj.steps.push_back(make_result(t1, u, f ? &raw1 : nullptr));
    fn = std::move(f1);
  }
  return traj;
}

}  // namespace nssl

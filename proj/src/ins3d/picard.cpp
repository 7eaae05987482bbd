#include <cmath>
#include <string>

#include "momentum.hpp"
#include "nssl/error.hpp"
#include "nssl/ins3d.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

namespace {

using detail::to_physical;

// Level trajectories; a single entry stands for a field constant in time.
const PhysicalField& h_at(const Ins3dTrajectory& tr, std::size_t j) {
  return tr.h[std::min(j, tr.h.size() - 1)];
}
const SpectralField& w_at(const Ins3dTrajectory& tr, std::size_t j) {
  return tr.w[std::min(j, tr.w.size() - 1)];
}

double l2_sq(const PhysicalField& a, const PhysicalField& b) {
  auto x = a.component(0), y = b.component(0);
  double s = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p) s += (x[p] - y[p]) * (x[p] - y[p]);
  return s * a.grid().cell_volume();
}

}  // namespace

PicardResult picard_solve(std::shared_ptr<Background> bg, const PhysicalField& h0,
                          const SpectralField& w0, const Ins3dOptions& opt, double T, int n_max,
                          double tol) {
  if (!(h0.grid() == bg->grid3d()) || !(w0.grid() == bg->grid3d()) || h0.ncomp() != 1 ||
      w0.ncomp() != 3)
    throw ConfigError("picard: fields must be scalar h and three-component w on the 3D grid");
  if (std::abs(opt.dt - bg->dt()) > 1e-14 * bg->dt())
    throw ConfigError("picard: time step differs from the background's");
  const double hinf = detail::max_abs(h0.component(0));
  if (hinf > opt.h_gate)
    throw ConfigError("picard: ||h0||_inf = " + std::to_string(hinf) +
                      " exceeds the required bound " + std::to_string(opt.h_gate));
  if (n_max < 1) throw ConfigError("picard: n_max must be >= 1");
  const long nsteps = std::lround(T / opt.dt);
  if (nsteps < 1 || std::abs(nsteps * opt.dt - T) > 1e-9 * T)
    throw ConfigError("picard: T must be a positive multiple of dt");

  const Grid& g = h0.grid();
  std::vector<double> e, p1, p2;
  detail::etd_factors(g, opt.dt, e, p1, p2);

  std::vector<double> times;
  for (long j = 0; j <= nsteps; ++j) times.push_back(j * opt.dt);
  std::vector<BackgroundSamples> bgs;
  for (long j = 0; j <= nsteps; ++j) bgs.push_back(bg->samples(j));

  PicardResult res;
  Ins3dTrajectory prev{{0.0}, {h0}, {leray_project(w0)}};  // level 0
  std::optional<Ins3dTrajectory> prev2;                      // level -1: v = 0
  res.levels.push_back(PicardLevel{});

  // v^k at step j; level 0 is v0 = w0 + v2d(0) for all times.
  auto velocity = [&](const Ins3dTrajectory& tr, bool level0, long j) {
    const BackgroundSamples& b = level0 ? bgs[0] : bgs[j];
    return detail::full_velocity(b, to_physical(w_at(tr, j), opt.dealias));
  };

  for (int n = 1; n <= n_max; ++n) {
    const bool prev_is_seed = n == 1;
    const bool prev2_is_seed = n == 2;
    Ins3dTrajectory cur;
    cur.t = times;
    cur.h.push_back(h0);
    cur.w.push_back(leray_project(w0));
    SpectralField wt(g, 3);
    std::optional<SpectralField> r_prev;
    PicardLevel lvl;
    lvl.n = n;

    PhysicalField va = velocity(prev, prev_is_seed, 0);
    for (long j = 0; j < nsteps; ++j) {
      std::optional<PhysicalField> vb;
      if (prev2) vb = velocity(*prev2, prev2_is_seed, j);
      const PhysicalField& hk = h_at(prev, j);
      const SpectralField& w = cur.w.back();
      const detail::ExplicitPart ep =
          detail::explicit_part(w, va, vb ? &*vb : nullptr, hk, bgs[j], opt.dt, opt.dealias);
      if (ep.cfl > opt.cfl_limit)
        throw StabilityError("picard: CFL number " + std::to_string(ep.cfl) + " exceeds limit " +
                                 std::to_string(opt.cfl_limit) + " at level " + std::to_string(n),
                             ep.cfl);
      detail::MomentumSolve ms = detail::solve_momentum(ep.g, w, hk, j > 0 ? &wt : nullptr, opt);
      lvl.max_sweeps = std::max(lvl.max_sweeps, ms.stats.sweeps);
      wt = std::move(ms.w_t);

      SpectralField wn = w;
      detail::etd_advance(wn, ms.r, r_prev ? &*r_prev : nullptr, e, p1, p2, opt.dt);
      wn = leray_project(wn);
      detail::require_finite(wn, "picard", j + 1);
      r_prev = std::move(ms.r);

      PhysicalField vnext = velocity(prev, prev_is_seed, j + 1);
      PhysicalField vmid = va;
      vmid += vnext;
      vmid *= 0.5;
      cur.h.push_back(density_advect(cur.h.back(), vmid, opt.dt, opt.density));
      cur.w.push_back(std::move(wn));
      va = std::move(vnext);
    }

    std::vector<double> grad_sq;
    for (long j = 0; j <= nsteps; ++j) {
      const SpectralField dw = cur.w[j] - w_at(prev, j);
      lvl.dh_sup_sq = std::max(lvl.dh_sup_sq, l2_sq(cur.h[j], h_at(prev, j)));
      lvl.dw_sup_sq = std::max(lvl.dw_sup_sq, l2_norm_sq(dw));
      grad_sq.push_back(gradient_l2_norm_sq(dw, 1));
    }
    lvl.dgradw_int = simpson(grad_sq, opt.dt);
    lvl.I = lvl.dh_sup_sq + lvl.dw_sup_sq + lvl.dgradw_int;
    res.levels.push_back(lvl);

    prev2 = std::move(prev);
    prev = std::move(cur);
    if (lvl.I <= tol) {
      res.converged = true;
      break;
    }
    const std::size_t m = res.levels.size();
    if (n >= 3 && res.levels[m - 3].I <= res.levels[m - 2].I &&
        res.levels[m - 2].I <= res.levels[m - 1].I)
      throw NonContractionError("picard: I_n did not decrease over levels " + std::to_string(n - 2) +
                                ".." + std::to_string(n) + " (I = " + std::to_string(lvl.I) +
                                "); the horizon T may be too long");
  }
  res.last = std::move(prev);
  return res;
}

}  // namespace nssl

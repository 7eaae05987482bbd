#include <cmath>
#include <string>

#include "momentum.hpp"
#include "nssl/error.hpp"
#include "nssl/ins3d.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

using detail::to_physical;

namespace {

void require_perturbation(const Background& bg, const PhysicalField& h0, const SpectralField& w0,
                          const Ins3dOptions& opt) {
  if (!(h0.grid() == bg.grid3d()) || !(w0.grid() == bg.grid3d()))
    throw ConfigError("ins3d: perturbation fields must live on the background's 3D grid");
  if (h0.ncomp() != 1 || w0.ncomp() != 3)
    throw ConfigError("ins3d: expected scalar h and three-component w");
  if (std::abs(opt.dt - bg.dt()) > 1e-14 * bg.dt())
    throw ConfigError("ins3d: time step differs from the background's");
  const double hinf = detail::max_abs(h0.component(0));
  if (hinf > opt.h_gate)
    throw ConfigError("ins3d: ||h0||_inf = " + std::to_string(hinf) +
                      " exceeds the required bound " + std::to_string(opt.h_gate));
}

}  // namespace

PerturbationSolver::PerturbationSolver(std::shared_ptr<Background> bg, const PhysicalField& h0,
                                       const SpectralField& w0, Ins3dOptions opt)
    : bg_(std::move(bg)),
      opt_(opt),
      state_{h0, w0, SpectralField(w0.grid(), 1), 0.0, 0},
      w_t_(w0.grid(), 3),
      grad_q_(w0.grid(), 3),
      r_(w0.grid(), 3) {
  require_perturbation(*bg_, h0, w0, opt_);
  state_.w = leray_project(w0);
  detail::etd_factors(state_.w.grid(), opt_.dt, e_, p1_, p2_);
  evaluate();
}

PhysicalField PerturbationSolver::velocity() {
  return detail::full_velocity(bg_->samples(state_.step), to_physical(state_.w, opt_.dealias));
}

void PerturbationSolver::evaluate() {
  const BackgroundSamples bgs = bg_->samples(state_.step);
  const PhysicalField v = detail::full_velocity(bgs, to_physical(state_.w, opt_.dealias));
  const detail::ExplicitPart ep =
      detail::explicit_part(state_.w, v, &v, state_.h, bgs, opt_.dt, opt_.dealias);
  detail::MomentumSolve ms =
      detail::solve_momentum(ep.g, state_.w, state_.h, state_.step > 0 ? &w_t_ : nullptr, opt_);
  w_t_ = std::move(ms.w_t);
  r_ = std::move(ms.r);
  grad_q_ = std::move(ms.grad_q);
  stats_ = ms.stats;
  cfl_ = ep.cfl;
  state_.q = poisson_solve(divergence(grad_q_), 1e-8);
}

void PerturbationSolver::step() {
  if (cfl_ > opt_.cfl_limit)
    throw StabilityError("ins3d: CFL number " + std::to_string(cfl_) + " exceeds limit " +
                             std::to_string(opt_.cfl_limit) + " at t = " + std::to_string(state_.t),
                         cfl_);
  const long j = state_.step;
  SpectralField w = state_.w;
  detail::etd_advance(w, r_, r_prev_ ? &*r_prev_ : nullptr, e_, p1_, p2_, opt_.dt);
  w = leray_project(w);
  detail::require_finite(w, "ins3d", j + 1);

  PhysicalField vmid = detail::full_velocity(bg_->samples(j), to_physical(state_.w, opt_.dealias));
  vmid += detail::full_velocity(bg_->samples(j + 1), to_physical(w, opt_.dealias));
  vmid *= 0.5;
  state_.h = density_advect(state_.h, vmid, opt_.dt, opt_.density);

  r_prev_ = std::move(r_);
  r_ = SpectralField(w.grid(), 3);
  state_.w = std::move(w);
  ++state_.step;
  state_.t = state_.step * opt_.dt;
  evaluate();
}

Ns3dSolver::Ns3dSolver(const SpectralField& v0, double dt, bool dealias)
    : v_(leray_project(v0)), dt_(dt), dealias_(dealias) {
  if (v0.grid().ndim() != 3 || v0.ncomp() != 3)
    throw ConfigError("ns3d: expected a three-component field on a 3D grid");
  detail::etd_factors(v0.grid(), dt, e_, p1_, p2_);
}

void Ns3dSolver::step() {
  const SpectralField vd = dealias_ ? dealias(v_) : v_;
  const PhysicalField u = inverse(vd);
  const PhysicalField gu = inverse(gradient_tensor(vd));
  PhysicalField adv(v_.grid(), 3);
  const std::size_t n = v_.grid().size();
  for (int i = 0; i < 3; ++i) {
    auto a = adv.component(i);
    for (std::size_t p = 0; p < n; ++p)
      for (int j = 0; j < 3; ++j) a[p] += u.component(j)[p] * gu.component(3 * i + j)[p];
  }
  SpectralField nl = forward(adv);
  if (dealias_) dealias_inplace(nl);
  nl = leray_project(nl);
  nl *= -1.0;
  for (int c = 0; c < 3; ++c) nl.component(c)[0] = 0.0;

  detail::etd_advance(v_, nl, n_prev_ ? &*n_prev_ : nullptr, e_, p1_, p2_, dt_);
  n_prev_ = std::move(nl);
  t_ += dt_;
  detail::require_finite(v_, "ns3d", std::lround(t_ / dt_));
}

Ins3dTrajectory ins3d_trajectory(std::shared_ptr<Background> bg, const PhysicalField& h0,
                                 const SpectralField& w0, const Ins3dOptions& opt, double T) {
  PerturbationSolver s(std::move(bg), h0, w0, opt);
  const long nsteps = std::lround(T / opt.dt);
  if (nsteps < 1 || std::abs(nsteps * opt.dt - T) > 1e-9 * T)
    throw ConfigError("ins3d: T must be a positive multiple of dt");
  Ins3dTrajectory tr;
  auto keep = [&] {
    tr.t.push_back(s.state().t);
    tr.h.push_back(s.state().h);
    tr.w.push_back(s.state().w);
  };
  keep();
  for (long n = 0; n < nsteps; ++n) {
    s.step();
    keep();
  }
  return tr;
}

double trajectory_gap(const Ins3dTrajectory& a, const Ins3dTrajectory& b) {
  const std::size_t n = std::min(a.t.size(), b.t.size());
  double gap = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double dh = 0.0;
    auto ha = a.h[j].component(0), hb = b.h[j].component(0);
    for (std::size_t p = 0; p < ha.size(); ++p) dh += (ha[p] - hb[p]) * (ha[p] - hb[p]);
    dh *= a.h[j].grid().cell_volume();
    gap = std::max(gap, std::sqrt(dh + l2_norm_sq(a.w[j] - b.w[j])));
  }
  return gap;
}

}  // namespace nssl

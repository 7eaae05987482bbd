#include "momentum.hpp"

#include <cmath>
#include <string>

#include "nssl/error.hpp"
#include "nssl/spectral.hpp"
#include "nssl/stokes.hpp"

namespace nssl::detail {

PhysicalField to_physical(const SpectralField& f, bool dealias_first) {
  return dealias_first ? inverse(dealias(f)) : inverse(f);
}

PhysicalField full_velocity(const BackgroundSamples& bg, const PhysicalField& w) {
  const Grid& g = w.grid();
  const std::size_t n = g.size();
  const std::size_t n2 = g.dim(2);
  PhysicalField v = w;
  for (int c = 0; c < 3; ++c) {
    auto dst = v.component(c);
    auto src = bg.v.component(c);
    for (std::size_t p = 0; p < n; ++p) dst[p] += src[p / n2];
  }
  return v;
}

ExplicitPart explicit_part(const SpectralField& w, const PhysicalField& a, const PhysicalField* b,
                           const PhysicalField& h, const BackgroundSamples& bg, double dt,
                           bool dealias_products) {
  const Grid& g = w.grid();
  const std::size_t n = g.size();
  const std::size_t n2 = g.dim(2);
  const SpectralField wd = dealias_products ? dealias(w) : w;
  const PhysicalField wp = inverse(wd);
  const PhysicalField gw = inverse(gradient_tensor(wd));  // comp 3i+j = d_j w_i

  ExplicitPart out{SpectralField(g, 3), 0.0};
  PhysicalField acc(g, 3);
  auto hh = h.component(0);
  const double dx[3] = {g.spacing(0), g.spacing(1), g.spacing(2)};
  double cfl = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t q = p / n2;
    const double av[3] = {a.component(0)[p], a.component(1)[p], a.component(2)[p]};
    cfl = std::max(cfl, std::abs(av[0]) / dx[0] + std::abs(av[1]) / dx[1] + std::abs(av[2]) / dx[2]);
    double bv[3] = {0.0, 0.0, 0.0};
    if (b)
      for (int j = 0; j < 3; ++j) bv[j] = b->component(j)[p];
    const double w1 = wp.component(0)[p], w2 = wp.component(1)[p];
    const double hp = hh[p];
    for (int i = 0; i < 3; ++i) {
      double aw = 0.0, bw = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double d = gw.component(3 * i + j)[p];
        aw += av[j] * d;
        bw += bv[j] * d;
      }
      const double wgv = w1 * bg.grad.component(2 * i)[q] + w2 * bg.grad.component(2 * i + 1)[q];
      acc.component(i)[p] = -aw - hp * bw - (1.0 + hp) * wgv - hp * bg.vt.component(i)[q] -
                            hp * bg.adv.component(i)[q];
    }
  }
  out.g = forward(acc);
  if (dealias_products) dealias_inplace(out.g);
  out.cfl = cfl * dt;
  return out;
}

MomentumSolve solve_momentum(const SpectralField& g, const SpectralField& w,
                             const PhysicalField& h, const SpectralField* guess,
                             const Ins3dOptions& opt) {
  const Grid& grid = w.grid();
  const std::size_t n = grid.size();
  auto hh = h.component(0);
  MomentumSolve out{guess ? *guess : SpectralField(grid, 3), SpectralField(grid, 3),
                    SpectralField(grid, 3), InnerStats{}};
  out.stats.h_inf = max_abs(hh);
  const SpectralField lap = laplacian(w);

  // With h = 0 the balance is explicit.
  const bool trivial = out.stats.h_inf == 0.0;
  double prev_diff = 0.0;
  for (int m = 1;; ++m) {
    SpectralField rhs = g;
    if (!trivial) {
      PhysicalField hw = to_physical(out.w_t, opt.dealias);
      for (int c = 0; c < 3; ++c) {
        auto d = hw.component(c);
        for (std::size_t p = 0; p < n; ++p) d[p] *= hh[p];
      }
      SpectralField prod = forward(hw);
      if (opt.dealias) dealias_inplace(prod);
      rhs -= prod;
    }
    SpectralField r = leray_project(rhs);
    SpectralField wt = lap;
    wt += r;
    SpectralField delta = wt;
    delta -= out.w_t;
    const double diff = std::sqrt(l2_norm_sq(delta));
    const double scale = std::sqrt(l2_norm_sq(wt));
    // Ratios are only meaningful well above round-off.
    if (m > 1 && prev_diff > 1e-10 * scale) out.stats.max_ratio = std::max(out.stats.max_ratio, diff / prev_diff);
    prev_diff = diff;
    out.w_t = std::move(wt);
    out.r = std::move(r);
    out.stats.sweeps = m;
    if (trivial || diff <= opt.inner_tol * std::max(1.0, scale) || diff <= 1e-14 * scale) {
      out.grad_q = gradient_part(rhs);
      return out;
    }
    if (m >= opt.max_inner)
      throw NonContractionError("ins3d: inner fixed point did not converge in " +
                                std::to_string(opt.max_inner) + " sweeps (||h||_inf = " +
                                std::to_string(out.stats.h_inf) + ", last difference " +
                                std::to_string(diff) + ")");
  }
}

void etd_factors(const Grid& g, double dt, std::vector<double>& e, std::vector<double>& p1,
                 std::vector<double>& p2) {
  e.clear();
  p1.clear();
  p2.clear();
  const auto k2 = g.k_squared();
  for (std::size_t s = 0; s < k2.size(); ++s) {
    const double z = -k2[s] * dt;
    e.push_back(std::exp(z));
    p1.push_back(phi1(z));
    p2.push_back(phi2(z));
  }
}

void etd_advance(SpectralField& w, const SpectralField& r, const SpectralField* r_prev,
                 std::span<const double> e, std::span<const double> p1,
                 std::span<const double> p2, double dt) {
  const std::size_t ns = w.modes();
  for (int c = 0; c < w.ncomp(); ++c) {
    auto wc = w.component(c);
    auto rc = r.component(c);
    if (r_prev) {
      auto pc = r_prev->component(c);
      for (std::size_t s = 0; s < ns; ++s)
        wc[s] = e[s] * wc[s] + dt * (p1[s] * rc[s] + p2[s] * (rc[s] - pc[s]));
    } else {
      for (std::size_t s = 0; s < ns; ++s) wc[s] = e[s] * wc[s] + dt * p1[s] * rc[s];
    }
  }
}

void require_finite(const SpectralField& f, const char* what, long step) {
  for (const cplx& z : f.data())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw NumericalError(std::string(what) + ": non-finite state at step " + std::to_string(step));
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace nssl::detail

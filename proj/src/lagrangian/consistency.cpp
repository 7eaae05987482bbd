#include <cmath>
#include <optional>
#include <string>

#include "nssl/error.hpp"
#include "nssl/interp.hpp"
#include "nssl/lagrangian.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

namespace {

double l2(const PhysicalField& f) {
  double s = 0.0;
  for (double x : f.data()) s += x * x;
  return std::sqrt(s * f.grid().cell_volume());
}

// Rows i of a matrix field m (entries i*3 + j) as a 3-component field.
PhysicalField row(const PhysicalField& m, int i) {
  PhysicalField out(m.grid(), 3);
  for (int j = 0; j < 3; ++j) {
    auto src = m.component(3 * i + j);
    std::copy(src.begin(), src.end(), out.component(j).begin());
  }
  return out;
}

// One time level of the coupled run.
struct Level {
  FlowMapState flow;
  PhysicalField wbar;
  SpectralField q;
  long step;
};

struct Residual {
  double value, scale;
};

// wbar_t - div_y(A A^T grad_y wbar) + A^T grad_y qbar - Fbar at one level.
Residual momentum_residual(const Level& lv, const PhysicalField& wbar_t, const PhysicalField& h0,
                           Background& bg) {
  const Grid& g = lv.wbar.grid();
  const std::size_t n = g.size();
  const PhysicalField gw = inverse(gradient_tensor(forward(lv.wbar)));
  const PhysicalField qbar = pull_back(inverse(lv.q), lv.flow);
  const PhysicalField gq = inverse(gradient(forward(qbar)));
  const PhysicalField& A = lv.flow.a;

  PhysicalField flux(g, 9);
  for (std::size_t p = 0; p < n; ++p) {
    double m[9];
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += A.component(3 * j + l)[p] * A.component(3 * k + l)[p];
        m[3 * j + k] = s;
      }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += m[3 * j + k] * gw.component(3 * i + k)[p];
        flux.component(3 * i + j)[p] = s;
      }
  }
  PhysicalField visc(g, 3);
  for (int i = 0; i < 3; ++i) {
    const PhysicalField d = inverse(divergence(forward(row(flux, i))));
    auto src = d.component(0);
    std::copy(src.begin(), src.end(), visc.component(i).begin());
  }

  const BackgroundSamples b = bg.samples(lv.step);
  const CubicInterpolator ip(bg.grid2d());
  std::vector<std::span<const double>> bs;
  for (int c = 0; c < 3; ++c) bs.push_back(b.vt.component(c));
  for (int c = 0; c < 3; ++c) bs.push_back(b.adv.component(c));
  for (int c = 0; c < 6; ++c) bs.push_back(b.grad.component(c));

  PhysicalField res(g, 3);
  auto h = h0.component(0);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t i0 = p / (g.dim(1) * g.dim(2)), i1 = (p / g.dim(2)) % g.dim(1);
    const double xh[2] = {g.coord(0, static_cast<int>(i0)) + lv.flow.displacement.component(0)[p],
                          g.coord(1, static_cast<int>(i1)) + lv.flow.displacement.component(1)[p]};
    double s[12];
    ip.eval(bs, xh, s);
    for (int i = 0; i < 3; ++i) {
      double aq = 0.0;
      for (int j = 0; j < 3; ++j) aq += A.component(3 * j + i)[p] * gq.component(j)[p];
      const double wt = wbar_t.component(i)[p];
      const double wgv = lv.wbar.component(0)[p] * s[6 + 2 * i] + lv.wbar.component(1)[p] * s[7 + 2 * i];
      const double fbar = -h[p] * s[i] - h[p] * wt - h[p] * s[3 + i] - (1.0 + h[p]) * wgv;
      res.component(i)[p] = wt - visc.component(i)[p] + aq - fbar;
    }
  }
  return {l2(res), l2(wbar_t)};
}

// ||div_y(A wbar)|| / ||grad_y wbar||.
double twisted_divergence(const Level& lv) {
  const Grid& g = lv.wbar.grid();
  PhysicalField aw(g, 3);
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += lv.flow.a.component(3 * j + i)[p] * lv.wbar.component(i)[p];
      aw.component(j)[p] = s;
    }
  const double d = l2(inverse(divergence(forward(aw))));
  const double scale = l2(inverse(gradient_tensor(forward(lv.wbar))));
  return scale > 0.0 ? d / scale : 0.0;
}

}  // namespace

EulerLagrangeReport euler_lagrange_consistency(PerturbationSolver& solver, long nsteps,
                                               const EulerLagrangeOptions& opt) {
  if (nsteps < 2) throw ConfigError("euler-lagrange: at least two steps are required");
  if (opt.cadence < 1) throw ConfigError("euler-lagrange: cadence must be >= 1");
  if (!(opt.settle >= 0.0 && opt.settle < 1.0))
    throw ConfigError("euler-lagrange: settle must lie in [0, 1)");
  Background& bg = solver.background();
  const Grid& g = bg.grid3d();
  const double dt = solver.options().dt;
  const PhysicalField h0 = solver.state().h;

  auto velocity_slice = [&] {
    const PerturbationState& st = solver.state();
    return make_slice(st.t, extend_to_3d(bg.v(st.step), g) + st.w);
  };

  EulerLagrangeReport rep;
  FlowMap fm(g);
  auto level = [&] {
    const PerturbationState& st = solver.state();
    return Level{fm.state(), pull_back(inverse(st.w), fm.state()), st.q, st.step};
  };
  auto density_gap = [&] {
    PhysicalField d = pull_back(solver.state().h, fm.state());
    d -= h0;
    return l2(d);
  };

  std::optional<Level> prev;
  Level cur = level();
  VelocitySlice sa = velocity_slice();
  rep.density_gap = density_gap();
  rep.divergence = twisted_divergence(cur);
  rep.series.add(0.0, "density:gap", rep.density_gap);
  rep.series.add(0.0, "div:twisted", rep.divergence);
  rep.series.add(0.0, "lip:budget", 0.0);

  for (long n = 0; n < nsteps; ++n) {
    solver.step();
    VelocitySlice sb = velocity_slice();
    fm.step(sa, sb);
    sa = std::move(sb);
    if (!fm.state().certified) {
      rep.truncated = true;
      break;
    }
    Level next = level();
    const double t = next.flow.t;
    const bool rec = (n + 1) % opt.cadence == 0 || n + 1 == nsteps;

    const double gap = density_gap();
    rep.density_gap = std::max(rep.density_gap, gap);
    const double div = twisted_divergence(next);
    rep.divergence = std::max(rep.divergence, div);
    if (prev) {
      PhysicalField wt = next.wbar;
      wt -= prev->wbar;
      wt *= 0.5 / dt;
      const Residual r = momentum_residual(cur, wt, h0, bg);
      if (cur.flow.t >= opt.settle * nsteps * dt - 1e-12 * dt)
        rep.momentum_residual = std::max(rep.momentum_residual, r.value);
      if (n % opt.cadence == 0) {
        rep.series.add(cur.flow.t, "momentum:residual", r.value);
        rep.series.add(cur.flow.t, "momentum:scale", r.scale);
      }
    }
    if (rec) {
      rep.series.add(t, "density:gap", gap);
      rep.series.add(t, "div:twisted", div);
      rep.series.add(t, "lip:budget", next.flow.lip_budget);
      rep.series.add(t, "det:max_dev", [&] {
        double m = 0.0;
        for (double d : next.flow.det.component(0)) m = std::max(m, std::abs(d - 1.0));
        return m;
      }());
    }
    prev = std::move(cur);
    cur = std::move(next);
    rep.t_end = t;
    rep.lip_budget = cur.flow.lip_budget;
  }

  rep.monitors.push_back(bound_monitor("frozen-density", "sup_t ||h(t, X(t, y)) - h0(y)||_L2",
                                       rep.density_gap, 1e-4));
  rep.monitors.push_back(report_only("lagrangian-momentum",
                                     "sup L2 residual of the Lagrangian momentum equation past the start-up layer",
                                     rep.momentum_residual, 0.0));
  rep.monitors.push_back(bound_monitor("twisted-divergence",
                                       "sup_t ||div_y(A wbar)||_L2 / ||grad_y wbar||_L2",
                                       rep.divergence, opt.div_tol));
  MonitorReport w = report_only("certified-window", "int ||grad_y vbar||_Linf over the run",
                                rep.lip_budget, 0.5);
  if (rep.truncated) w.note = "lip budget exceeded 1/2; report truncated at t = " + std::to_string(rep.t_end);
  rep.monitors.push_back(w);
  return rep;
}

}  // namespace nssl

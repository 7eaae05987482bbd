#include <cmath>
#include <string>

#include "nssl/error.hpp"
#include "nssl/hns2d.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

double simpson(const std::vector<double>& g, double h) {
  const std::size_t n = g.empty() ? 0 : g.size() - 1;  // intervals
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * h * (g[0] + g[1]);
  auto simp = [&](std::size_t a, std::size_t b) {  // even number of intervals
    double s = g[a] + g[b];
    for (std::size_t i = a + 1; i < b; ++i) s += (i - a) % 2 ? 4.0 * g[i] : 2.0 * g[i];
    return s * h / 3.0;
  };
  if (n % 2 == 0) return simp(0, n);
  double s = n > 3 ? simp(0, n - 3) : 0.0;
  const std::size_t m = n - 3;
  return s + 3.0 * h / 8.0 * (g[m] + 3.0 * g[m + 1] + 3.0 * g[m + 2] + g[m + 3]);
}

double contamination(const SpectralField& v, double radius) {
  const Grid& g = v.grid();
  const PhysicalField u = inverse(v);
  const int n0 = g.dim(0), n1 = g.dim(1);
  const double c0 = 0.5 * g.length(0), c1 = 0.5 * g.length(1);
  double outside = 0.0, total = 0.0;
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * n1 + j;
      double e = 0.0;
      for (int c = 0; c < u.ncomp(); ++c) e += u.component(c)[p] * u.component(c)[p];
      total += e;
      if (std::hypot(g.coord(0, i) - c0, g.coord(1, j) - c1) > radius) outside += e;
    }
  return total > 0.0 ? outside / total : 0.0;
}

namespace {

std::string pname(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

SpectralField horizontal_part(const SpectralField& v) {
  SpectralField h(v.grid(), 2);
  for (int c = 0; c < 2; ++c)
    std::copy(v.component(c).begin(), v.component(c).end(), h.component(c).begin());
  return h;
}

}  // namespace

Hns2dRun hns2d_solve(const SpectralField& v0, const Hns2dOptions& opt,
                     const Hns2dRecordOptions& rec) {
  if (rec.cadence < 1) throw ConfigError("hns2d: cadence must be >= 1");
  Hns2dSolver solver(v0, opt);
  const long nsteps = std::lround(rec.T / opt.dt);
  if (nsteps < 1 || std::abs(nsteps * opt.dt - rec.T) > 1e-9 * rec.T)
    throw ConfigError("hns2d: T must be a positive multiple of dt");

  Hns2dRun run{NormSeries{}, solver.v(), l2_norm_sq(solver.v()), {}};
  const cplx m0 = solver.v().mean(0), m1 = solver.v().mean(1);
  std::vector<double> g_diss, g_wt, g_linf;
  const double radius =
      rec.contamination_radius > 0.0 ? rec.contamination_radius : 0.25 * solver.grid().length(0);

  auto accumulate = [&] {
    const SpectralField& v = solver.v();
    g_diss.push_back(gradient_l2_norm_sq(v, 1));
    if (rec.weighted) {
      SpectralField vt = laplacian(v);
      vt += solver.current_nonlinear();
      g_wt.push_back(solver.t() * l2_norm_sq(vt));
    }
    const double vinf = lp_norm(v, kInf);
    g_linf.push_back(vinf * vinf);
  };

  auto record = [&] {
    const SpectralField& v = solver.v();
    const double t = solver.t();
    NormSeries& s = run.series;
    const double e = l2_norm_sq(v);
    const double diss = simpson(g_diss, opt.dt);
    s.add(t, "energy", e);
    s.add(t, "dissipation", diss);
    s.add(t, "energy_ledger", e + 2.0 * diss);
    const SpectralField w = vorticity2d(v);
    for (double p : rec.vorticity_p) s.add(t, "vorticity:Lp:" + pname(p), lp_norm(w, p));
    s.add(t, "v3:Linf", lp_norm(v.component_field(2), kInf));
    s.add(t, "v:L2Linf_sq", simpson(g_linf, opt.dt));
    const SpectralField vh = horizontal_part(v);
    for (double p : rec.cz_p) {
      const double wn = lp_norm(w, p);
      if (wn > 0.0) s.add(t, "cz_ratio:Lp:" + pname(p), gradient_lp_norm(vh, 1, p) / wn);
    }
    const double drift = std::max(std::abs(v.mean(0) - m0), std::abs(v.mean(1) - m1));
    run.mean_drift.push_back(drift);
    s.add(t, "mean_drift", drift);
    SpectralField vt = laplacian(v);
    vt += solver.current_nonlinear();
    if (rec.weighted) {
      s.add(t, "weighted:t^1:grad_v_sq", t * gradient_l2_norm_sq(v, 1));
      s.add(t, "weighted:t^2:dtv_sq", t * t * l2_norm_sq(vt));
      s.add(t, "weighted:t^3:grad_dtv_sq", t * t * t * gradient_l2_norm_sq(vt, 1));
      s.add(t, "weighted:t^4:hess_dtv_sq", t * t * t * t * gradient_l2_norm_sq(vt, 2));
      s.add(t, "weighted:int_t:dtv_sq", simpson(g_wt, opt.dt));
    }
    if (rec.decay) {
      s.add(t, "v:Linf", lp_norm(v, kInf));
      s.add(t, "grad_v:Linf", gradient_lp_norm(v, 1, kInf));
      s.add(t, "dtv:Linf", lp_norm(vt, kInf));
      s.add(t, "contamination", contamination(v, radius));
    }
    if (rec.on_record) rec.on_record(solver);
  };

  accumulate();
  record();
  for (long n = 1; n <= nsteps; ++n) {
    solver.step();
    accumulate();
    if (n % rec.cadence == 0 || n == nsteps) record();
  }
  run.final_v = solver.v();
  return run;
}

DecayProbeResult hns2d_decay_probe(const SpectralField& v0, const Hns2dOptions& opt, double t0,
                                   double t1, int samples, double contamination_tol) {
  if (!(t0 > 0.0 && t1 > t0)) throw ConfigError("decay probe: window must satisfy 0 < t0 < t1");
  if (samples < 8) throw ConfigError("decay probe: need at least 8 samples");
  Hns2dSolver solver(v0, opt);
  const SpectralField base = solver.v();
  const double radius = 0.25 * solver.grid().length(0);

  // Geometric sample times rounded to whole steps.
  std::vector<long> at;
  for (int i = 0; i < samples; ++i) {
    const double t = t0 * std::pow(t1 / t0, i / double(samples - 1));
    const long n = std::max(1L, std::lround(t / opt.dt));
    if (at.empty() || n > at.back()) at.push_back(n);
  }

  DecayProbeResult r;
  r.t0 = t0;
  std::vector<double> ts, vn, gn, dn, ov, og, od;
  double t_ok = 0.0;
  for (long target : at) {
    while (solver.steps() < target) solver.step();
    const double t = solver.t();
    const double cont = contamination(solver.v(), radius);
    r.series.add(t, "contamination", cont);
    if (cont > contamination_tol) {
      r.contaminated = true;
      break;
    }
    t_ok = t;
    SpectralField vt = laplacian(solver.v());
    vt += solver.current_nonlinear();
    const SpectralField heat = heat_flow(base, t);
    ts.push_back(t);
    vn.push_back(lp_norm(solver.v(), kInf));
    gn.push_back(gradient_lp_norm(solver.v(), 1, kInf));
    dn.push_back(lp_norm(vt, kInf));
    ov.push_back(lp_norm(heat, kInf));
    og.push_back(gradient_lp_norm(heat, 1, kInf));
    od.push_back(lp_norm(laplacian(heat), kInf));
    r.series.add(t, "v:Linf", vn.back());
    r.series.add(t, "grad_v:Linf", gn.back());
    r.series.add(t, "dtv:Linf", dn.back());
    r.series.add(t, "heat:v:Linf", ov.back());
    r.series.add(t, "heat:grad_v:Linf", og.back());
    r.series.add(t, "heat:dtv:Linf", od.back());
  }
  r.t1 = t_ok;
  const double lo = ts.empty() ? t0 : ts.front();
  r.v_linf = decay_fit(ts, vn, lo, t_ok, r.contaminated);
  r.grad_v_linf = decay_fit(ts, gn, lo, t_ok, r.contaminated);
  r.dtv_linf = decay_fit(ts, dn, lo, t_ok, r.contaminated);
  r.oracle_v_linf = decay_fit(ts, ov, lo, t_ok, r.contaminated);
  r.oracle_grad_v_linf = decay_fit(ts, og, lo, t_ok, r.contaminated);
  r.oracle_dtv_linf = decay_fit(ts, od, lo, t_ok, r.contaminated);
  return r;
}

}  // namespace nssl

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include "internal.hpp"
#include "nssl/hns2d.hpp"
#include "nssl/ins3d.hpp"
#include "nssl/lagrangian.hpp"
#include "nssl/spectral.hpp"
#include "nssl/stokes.hpp"
#include "nssl/twisted_div.hpp"

namespace nssl::detail {

namespace {

const std::map<std::string, std::vector<std::string>>& registry() {
  static const std::map<std::string, std::vector<std::string>> r{
      {"hns2d",
       {"energy-inequality", "vorticity-Lp:", "v3-maximum-principle", "weighted:",
        "taylor-green-error", "temporal-order"}},
      {"decay-probe",
       {"decay-slope:v", "decay-slope:grad_v", "decay-slope:dtv", "heat-oracle", "contamination"}},
      {"ins3d-direct",
       {"solver", "density-bound", "energy-amplification", "density-gradient-growth", "smallness",
        "divergence", "inner-contraction", "density-conservation:L2", "density-conservation:Linf"}},
      {"ins3d-picard", {"picard-contraction", "picard-direct-gap", "picard-converged"}},
      {"patch", {"patch-curvature", "patch-area", "patch-spacing"}},
      {"twisted-div",
       {"twisted-contraction", "twisted-residual", "div-estimate-R", "div-estimate-g",
        "div-estimate-t"}},
      {"stokes-maxreg", {"maxreg-ratio:", "maxreg-spread"}},
      {"euler-lagrange",
       {"frozen-density", "lagrangian-momentum", "twisted-divergence", "certified-window",
        "momentum-order"}},
  };
  return r;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string step_tag(const char* what, long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%08ld", what, step);
  return buf;
}

long step_count(const ExperimentConfig& c, double dt) {
  const long n = std::lround(c.time.T / dt);
  if (n < 1 || std::abs(n * dt - c.time.T) > 1e-9 * std::max(1.0, c.time.T))
    c.raw.fail("time.T", "must be a positive multiple of dt = " + fmt("%g", dt));
  return n;
}

GeneratorSpec role(const ExperimentConfig& c, const std::string& r, const std::string& def,
                   double amp = 1.0) {
  auto it = c.init.find(r);
  if (it != c.init.end()) return it->second;
  GeneratorSpec g;
  g.name = def;
  g.amplitude = amp;
  return g;
}

void reject_roles(const ExperimentConfig& c, std::initializer_list<const char*> allowed) {
  for (const auto& [r, g] : c.init) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || r == a;
    if (!ok) c.raw.fail("init." + r, "role not used by experiment kind '" + c.kind + "'");
  }
}

PhysicalField generate(const ExperimentConfig& c, const std::string& r, const GeneratorSpec& g,
                       const Grid& grid, int ncomp, double h_gate = kInf) {
  try {
    return initial_data(g, grid, ncomp, h_gate);
  } catch (const ConfigError& e) {
    if (c.raw.has("init." + r)) c.raw.fail("init." + r, e.what());
    throw;
  }
}

// dt (sum_i max |v_i| / dx_i) against the limit unless waived.
void check_cfl(const ExperimentConfig& c, std::initializer_list<const PhysicalField*> fields,
               double limit) {
  if (c.cfl_waived) return;
  double cfl = 0.0;
  for (const PhysicalField* f : fields) {
    double s = 0.0;
    for (int a = 0; a < std::min(f->ncomp(), f->grid().ndim()); ++a) {
      double m = 0.0;
      for (double x : f->component(a)) m = std::max(m, std::abs(x));
      s += m / f->grid().spacing(a);
    }
    cfl += s;
  }
  cfl *= c.time.dt;
  if (cfl > limit)
    c.raw.fail("time.dt", "initial CFL number " + fmt("%.4g", cfl) + " exceeds " + fmt("%g", limit) +
                              " (set time.cfl_waive = true to run anyway)");
}

Hns2dScheme scheme(const Config& r, const std::string& key) {
  const std::string s = r.str(key, "exp-ab2");
  if (s == "exp-ab2") return Hns2dScheme::kExpAB2;
  if (s == "lawson-rk4") return Hns2dScheme::kLawsonRK4;
  r.fail(key, "expected exp-ab2 or lawson-rk4, got '" + s + "'");
}

int snapshot_every(const ExperimentConfig& c) {
  const long k = c.raw.integer("output.snapshot_every", 0);
  if (k < 0) c.raw.fail("output.snapshot_every", "must be >= 0");
  return static_cast<int>(k);
}

void append(std::vector<MonitorReport>& to, const std::vector<MonitorReport>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

// Closed-form (Galilean-shifted) three-component Taylor-Green flow.
PhysicalField taylor_green_exact(const GeneratorSpec& s, const Grid& g, double t) {
  const double k = kTwoPi / g.length(0);
  const double A = s.amplitude;
  auto p = [&](const char* n) {
    auto it = s.params.find(n);
    return it == s.params.end() ? 0.0 : it->second;
  };
  const double U1 = p("U1"), U2 = p("U2"), c3 = p("c3"), d = std::exp(-2.0 * k * k * t);
  return sample(g, 3, [=](const double* x, double* o) {
    const double y1 = k * (x[0] - U1 * t), y2 = k * (x[1] - U2 * t);
    o[0] = U1 - A * std::cos(y1) * std::sin(y2) * d;
    o[1] = U2 + A * std::sin(y1) * std::cos(y2) * d;
    o[2] = c3 * A * std::cos(y1) * std::cos(y2) * d;
  });
}

double max_abs_diff(const PhysicalField& a, const PhysicalField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// ---- hns2d -------------------------------------------------------------------

Runner hns2d(const ExperimentConfig& c) {
  reject_roles(c, {"velocity"});
  const Config& r = c.raw;
  const Grid g = Grid::cube(2, c.grid.n, c.grid.length);
  const GeneratorSpec vs = role(c, "velocity", "taylor-green");
  const Hns2dOptions opt{c.time.dt, scheme(r, "hns2d.scheme"), r.num("hns2d.cfl_limit", 0.5),
                         r.flag("hns2d.dealias", true)};
  Hns2dRecordOptions rec;
  rec.T = c.time.T;
  rec.cadence = c.time.cadence;
  if (r.has("hns2d.vorticity_p")) rec.vorticity_p = r.nums("hns2d.vorticity_p");
  rec.weighted = r.flag("hns2d.weighted", true);
  const double transient = r.num("hns2d.transient", 2.0 * std::pow(c.grid.length / kTwoPi, 2.0));
  const std::vector<double> order_dts = r.has("hns2d.order_dts") ? r.nums("hns2d.order_dts")
                                                                 : std::vector<double>{};
  if (!order_dts.empty() && vs.name != "taylor-green")
    r.fail("hns2d.order_dts", "the order study needs the taylor-green generator");
  if (order_dts.size() == 1) r.fail("hns2d.order_dts", "needs at least two step sizes");
  step_count(c, c.time.dt);
  for (double dt : order_dts) {
    if (!(dt > 0.0)) r.fail("hns2d.order_dts", "step sizes must be positive");
    step_count(c, dt);
  }
  const PhysicalField v0 = generate(c, "velocity", vs, g, 3);
  check_cfl(c, {&v0}, opt.cfl_limit);
  const int every = snapshot_every(c);

  return [=](RunContext& ctx) mutable {
    int records = 0;
    rec.on_record = [&](const Hns2dSolver& s) {
      if (every > 0 && records % every == 0) ctx.snapshot(step_tag("v", s.steps()), inverse(s.v()));
      ++records;
    };
    ctx.snapshot("v_initial", v0);
    Hns2dRun run = hns2d_solve(forward(v0), opt, rec);
    const PhysicalField vT = inverse(run.final_v);
    ctx.snapshot("v_final", vT);
    ctx.out.series = run.series;
    append(ctx.out.monitors, hns2d_monitors(run.series));
    append(ctx.out.monitors, weighted_monitors(run.series, transient));
    if (vs.name != "taylor-green") return;

    ctx.out.monitors.push_back(bound_monitor("taylor-green-error",
                                             "max |v(T) - v_exact(T)| against the closed form",
                                             max_abs_diff(vT, taylor_green_exact(vs, g, c.time.T)),
                                             1e-10));
    if (order_dts.empty()) return;
    std::vector<double> err;
    for (double dt : order_dts) {
      Hns2dOptions o = opt;
      o.dt = dt;
      Hns2dSolver s(forward(v0), o);
      const long n = std::lround(c.time.T / dt);
      for (long i = 0; i < n; ++i) s.step();
      err.push_back(max_abs_diff(inverse(s.v()), taylor_green_exact(vs, g, c.time.T)));
    }
    double order = kInf;
    std::string note = "errors";
    for (std::size_t i = 0; i < err.size(); ++i) {
      note += " " + fmt("%.4e", err[i]);
      if (i > 0) order = std::min(order, std::log(err[i - 1] / err[i]) / std::log(order_dts[i - 1] / order_dts[i]));
    }
    MonitorReport m = floor_monitor("temporal-order", "observed order of the time integrator",
                                    order, 1.9);
    m.note = note;
    ctx.out.monitors.push_back(m);
  };
}

// ---- decay probe ---------------------------------------------------------------

Runner decay_probe(const ExperimentConfig& c) {
  reject_roles(c, {"velocity"});
  const Config& r = c.raw;
  const Grid g = Grid::cube(2, c.grid.n, c.grid.length);
  const GeneratorSpec vs = role(c, "velocity", "algebraic-vortex", 1e-3);
  const Hns2dOptions opt{c.time.dt, scheme(r, "hns2d.scheme"), r.num("hns2d.cfl_limit", 0.5), true};
  const double dx = g.spacing(0);
  const double R = vs.params.count("R") ? vs.params.at("R") : g.length(0) / 8.0;
  const double t0 = r.num("decay.t0", 8.0 * dx * dx);
  const double t1 = r.num("decay.t1", R * R / 60.0);
  const long samples = r.integer("decay.samples", 16);
  const double ctol = r.num("decay.contamination_tol", 1e-6);
  const double oracle_tol = r.num("decay.oracle_tol", 0.05);
  if (!(t0 > 0.0 && t1 > t0)) r.fail("decay.t1", "window needs 0 < t0 < t1");
  if (samples < 8) r.fail("decay.samples", "at least 8 samples are needed");
  const PhysicalField v0 = generate(c, "velocity", vs, g, 3);
  check_cfl(c, {&v0}, opt.cfl_limit);

  return [=](RunContext& ctx) {
    ctx.snapshot("v_initial", v0);
    const DecayProbeResult res =
        hns2d_decay_probe(forward(v0), opt, t0, t1, static_cast<int>(samples), ctol);
    ctx.out.series = res.series;
    struct Item {
      const char* id;
      const char* what;
      const DecayFit& fit;
      const DecayFit& oracle;
      double target, tol;
    };
    const Item items[] = {
        {"decay-slope:v", "||v||_Linf", res.v_linf, res.oracle_v_linf, -0.5, 0.1},
        {"decay-slope:grad_v", "||grad v||_Linf", res.grad_v_linf, res.oracle_grad_v_linf, -1.0, 0.1},
        {"decay-slope:dtv", "||d_t v||_Linf", res.dtv_linf, res.oracle_dtv_linf, -1.5, 0.15},
    };
    double gap = 0.0;
    for (const Item& it : items) {
      MonitorReport m = bound_monitor(it.id, std::string("|slope of ") + it.what + " - (" +
                                                 fmt("%g", it.target) + ")| on the fit window",
                                      std::abs(it.fit.slope - it.target), it.tol);
      m.note = "slope " + fmt("%.5f", it.fit.slope) + ", heat oracle " + fmt("%.5f", it.oracle.slope) +
               ", R2 " + fmt("%.5f", it.fit.r2);
      ctx.out.monitors.push_back(m);
      gap = std::max(gap, std::abs(it.fit.slope - it.oracle.slope));
    }
    ctx.out.monitors.push_back(bound_monitor(
        "heat-oracle", "max |slope - slope of e^{t Lap} v0| over the three norms", gap, oracle_tol));
    MonitorReport cm = report_only("contamination", "energy fraction outside radius L/4 on the window",
                                   res.contaminated ? 1.0 : 0.0, 0.0);
    cm.note = "window [" + fmt("%g", res.t0) + ", " + fmt("%g", res.t1) + "]" +
              (res.contaminated ? ", cut by the contamination monitor" : "");
    ctx.out.monitors.push_back(cm);
  };
}

// ---- 3D perturbation set-up ----------------------------------------------------------

struct Perturbation {
  std::shared_ptr<Background> bg;
  PhysicalField h0;
  PhysicalField w0;
  PhysicalField v2d0;
  Ins3dOptions opt;
};

Ins3dOptions ins3d_options(const ExperimentConfig& c, double dt) {
  const Config& r = c.raw;
  Ins3dOptions o;
  o.dt = dt;
  o.inner_tol = r.num("ins3d.inner_tol", o.inner_tol);
  o.max_inner = static_cast<int>(r.integer("ins3d.max_inner", o.max_inner));
  o.cfl_limit = r.num("ins3d.cfl_limit", o.cfl_limit);
  o.h_gate = r.num("ins3d.h_gate", o.h_gate);
  const std::string d = r.str("ins3d.density", "semi-lagrangian");
  if (d == "semi-lagrangian")
    o.density.scheme = DensityScheme::kSemiLagrangian;
  else if (d == "spectral")
    o.density.scheme = DensityScheme::kSpectral;
  else
    r.fail("ins3d.density", "expected semi-lagrangian or spectral, got '" + d + "'");
  return o;
}

Perturbation perturbation(const ExperimentConfig& c, int n, double dt, const char* density_default) {
  const Grid g2 = Grid::cube(2, n, c.grid.length), g3 = Grid::cube(3, n, c.grid.length);
  Perturbation p{nullptr, PhysicalField(g3, 1), PhysicalField(g3, 3), PhysicalField(g2, 3),
                 ins3d_options(c, dt)};
  p.v2d0 = generate(c, "background", role(c, "background", "zero"), g2, 3);
  p.h0 = generate(c, "density", role(c, "density", density_default, 0.05), g3, 1, p.opt.h_gate);
  p.w0 = generate(c, "velocity", role(c, "velocity", "zero"), g3, 3);
  check_cfl(c, {&p.v2d0, &p.w0}, p.opt.cfl_limit);
  const Hns2dOptions bo{dt, scheme(c.raw, "hns2d.scheme"), p.opt.cfl_limit, true};
  p.bg = std::make_shared<Background>(forward(p.v2d0), g3, bo);
  return p;
}

Runner ins3d_direct(const ExperimentConfig& c) {
  reject_roles(c, {"background", "density", "velocity"});
  const Config& r = c.raw;
  Perturbation p = perturbation(c, c.grid.n, c.time.dt, "random-band");
  StabilityConfig sc;
  sc.T = c.time.T;
  sc.cadence = c.time.cadence;
  sc.p = r.num("stability.p", sc.p);
  sc.tol = r.num("stability.tol", sc.tol);
  sc.c0 = r.num("stability.c0", sc.c0);
  sc.c_prime = r.num("stability.c_prime", sc.c_prime);
  const double ctol = r.num("stability.conservation_tol", 1e-2);
  step_count(c, c.time.dt);
  const int every = snapshot_every(c);

  return [=](RunContext& ctx) mutable {
    int records = 0;
    sc.on_record = [&](const PerturbationSolver& s) {
      if (every > 0 && records % every == 0) {
        ctx.snapshot(step_tag("h", s.state().step), s.state().h);
        ctx.snapshot(step_tag("w", s.state().step), inverse(s.state().w));
      }
      ++records;
    };
    ctx.snapshot("h_initial", p.h0);
    ctx.snapshot("w_initial", p.w0);
    const StabilityReport rep = stability_experiment(p.bg, p.h0, forward(p.w0), p.opt, sc);
    ctx.out.series = rep.series;
    ctx.out.monitors = rep.monitors;
    if (rep.series.has("h:L2"))
      ctx.out.monitors.push_back(conservation_monitor(
          "density-conservation:L2", "||h(t)||_L2 = ||h0||_L2 under transport", rep.series.values("h:L2"), ctol));
    if (rep.series.has("h:Linf"))
      ctx.out.monitors.push_back(conservation_monitor("density-conservation:Linf",
                                                      "||h(t)||_Linf = ||h0||_Linf under transport",
                                                      rep.series.values("h:Linf"), ctol));
  };
}

// Gap of a coarse trajectory against a fine one with half the step, at the
// coarse times.
double truncation_gap(const Ins3dTrajectory& coarse, const Ins3dTrajectory& fine) {
  double gap = 0.0;
  for (std::size_t j = 0; j < coarse.t.size() && 2 * j < fine.t.size(); ++j) {
    const auto ha = coarse.h[j].component(0), hb = fine.h[2 * j].component(0);
    double dh = 0.0;
    for (std::size_t q = 0; q < ha.size(); ++q) dh += (ha[q] - hb[q]) * (ha[q] - hb[q]);
    dh *= coarse.h[j].grid().cell_volume();
    gap = std::max(gap, std::sqrt(dh + l2_norm_sq(coarse.w[j] - fine.w[2 * j])));
  }
  return gap;
}

Runner ins3d_picard(const ExperimentConfig& c) {
  reject_roles(c, {"background", "density", "velocity"});
  const Config& r = c.raw;
  Perturbation p = perturbation(c, c.grid.n, c.time.dt, "random-band");
  const int levels = static_cast<int>(r.integer("picard.levels", 12));
  const double tol = r.num("picard.tol", 1e-26);
  const double gap_tol = r.num("picard.gap_tol", 1e-10);
  const double floor = r.num("picard.ratio_floor", 1e-20);
  const bool trunc = r.flag("picard.truncation", true);
  if (levels < 2) r.fail("picard.levels", "at least two levels are needed");
  step_count(c, c.time.dt);
  step_count(c, 0.5 * c.time.dt);
  Perturbation half = trunc ? perturbation(c, c.grid.n, 0.5 * c.time.dt, "random-band") : p;

  return [=](RunContext& ctx) {
    const PicardResult res = picard_solve(p.bg, p.h0, forward(p.w0), p.opt, c.time.T, levels, tol);
    double worst = 0.0;
    for (std::size_t n = 1; n < res.levels.size(); ++n) {
      const double I = res.levels[n].I;
      ctx.out.series.add(static_cast<double>(n), "picard:I", I);
      ctx.out.series.add(static_cast<double>(n), "picard:sweeps", res.levels[n].max_sweeps);
      if (n >= 3 && res.levels[n - 1].I > floor * res.levels[1].I) {
        const double ratio = I / res.levels[n - 1].I;
        ctx.out.series.add(static_cast<double>(n), "picard:ratio", ratio);
        worst = std::max(worst, ratio);
      }
    }
    ctx.out.monitors.push_back(bound_monitor(
        "picard-contraction", "max I_{n+1} / I_n for n >= 2 above the round-off floor", worst, 0.75));
    const Ins3dTrajectory direct = ins3d_trajectory(p.bg, p.h0, forward(p.w0), p.opt, c.time.T);
    for (std::size_t j = 0; j < direct.t.size(); j += c.time.cadence) {
      ctx.out.series.add(direct.t[j], "direct:h:L2", lp_norm(direct.h[j], 2.0));
      ctx.out.series.add(direct.t[j], "direct:w:L2", std::sqrt(l2_norm_sq(direct.w[j])));
    }
    const double gap = trajectory_gap(direct, res.last);
    double bound = gap_tol;
    std::string note;
    if (trunc) {
      const Ins3dTrajectory fine =
          ins3d_trajectory(half.bg, half.h0, forward(half.w0), half.opt, c.time.T);
      const double tr = truncation_gap(direct, fine);
      bound = std::max(gap_tol, 10.0 * tr);
      note = "truncation estimate " + fmt("%.4e", tr);
    }
    MonitorReport m = bound_monitor("picard-direct-gap",
                                    "sup_t ||(h, w)_picard - (h, w)_direct||_L2 <= max(tol, 10 truncation)",
                                    gap, bound);
    m.note = note;
    ctx.out.monitors.push_back(m);
    MonitorReport cv = report_only("picard-converged", "last increment I_n against picard.tol",
                                   res.levels.back().I, tol);
    cv.note = res.converged ? "converged" : "stopped at the level limit";
    ctx.out.monitors.push_back(cv);
    ctx.snapshot("h_final", res.last.h.back());
    ctx.snapshot("w_final", inverse(res.last.w.back()));
  };
}

// ---- density patch ---------------------------------------------------------------------

Runner patch(const ExperimentConfig& c) {
  reject_roles(c, {"background", "density", "velocity"});
  const Config& r = c.raw;
  Perturbation p = perturbation(c, c.grid.n, c.time.dt, "patch-ball");
  const GeneratorSpec ds = role(c, "density", "patch-ball", 0.05);
  if (ds.name != "patch-ball") r.fail("init.density", "the patch experiment needs patch-ball");
  const double L = c.grid.length;
  auto param = [&](const char* k, double def) {
    auto it = ds.params.find(k);
    return it == ds.params.end() ? def : it->second;
  };
  const MarkerCurve::Point centre{param("cx", 0.5 * L), param("cy", 0.5 * L), param("cz", 0.5 * L)};
  const double radius = param("r", L / 8.0);
  const long markers = r.integer("patch.markers", 128);
  const double factor = r.num("patch.curvature_factor", 10.0);
  const double area_tol = r.num("patch.area_tol", 1e-3);
  if (markers < 8) r.fail("patch.markers", "at least 8 markers are needed");
  const long nsteps = step_count(c, c.time.dt);
  bool planar = ds.amplitude == 0.0;
  for (double x : p.w0.data()) planar = planar && x == 0.0;

  return [=](RunContext& ctx) {
    PerturbationSolver solver(p.bg, p.h0, forward(p.w0), p.opt);
    const Grid& g = p.bg->grid3d();
    auto slice = [&] {
      const PerturbationState& st = solver.state();
      return make_slice(st.t, extend_to_3d(p.bg->v(st.step), g) + st.w);
    };
    CurveTracker tr(MarkerCurve::circle(centre, radius, static_cast<int>(markers)));
    const std::string curve = "curve.csv";
    std::ofstream out((std::filesystem::path(ctx.dir) / curve).string());
    out << "t,marker_index,x1,x2,x3\n";
    auto dump = [&](double t) {
      char buf[160];
      const auto& pts = tr.curve().points();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g\n", t, i, pts[i][0], pts[i][1],
                      pts[i][2]);
        out << buf;
      }
    };
    dump(0.0);
    ctx.snapshot("h_initial", p.h0);
    VelocitySlice a = slice();
    for (long n = 1; n <= nsteps; ++n) {
      solver.step();
      VelocitySlice b = slice();
      const bool rec = n % c.time.cadence == 0 || n == nsteps;
      tr.step(a, b, rec);
      if (rec) dump(solver.state().t);
      a = std::move(b);
    }
    out.close();
    ctx.out.files.push_back(curve);
    ctx.snapshot("h_final", solver.state().h);
    const PatchReport& rep = tr.report();
    ctx.out.series = rep.series;
    MonitorReport km = bound_monitor("patch-curvature", "max discrete curvature against " +
                                                             fmt("%g", factor) + " x its initial value",
                                     rep.max_curvature, factor * rep.initial_curvature);
    km.note = "resamples " + std::to_string(rep.resamples);
    ctx.out.monitors.push_back(km);
    const double da = rep.area0 > 0.0 ? std::abs(rep.area1 - rep.area0) / rep.area0 : 0.0;
    MonitorReport am = planar ? bound_monitor("patch-area", "relative change of the enclosed area", da, area_tol)
                              : report_only("patch-area", "relative change of the enclosed area", da, area_tol);
    if (!planar) am.note = "density contrast or w0 nonzero: the slice is not material, area reported only";
    ctx.out.monitors.push_back(am);
    const auto sp = rep.series.has("spacing:min") ? rep.series.values("spacing:min") : std::vector<double>{};
    ctx.out.monitors.push_back(report_only("patch-spacing", "minimum marker spacing over the run",
                                           sp.empty() ? 0.0 : *std::min_element(sp.begin(), sp.end()),
                                           sp.empty() ? 0.0 : sp.front()));
  };
}

// ---- twisted divergence ---------------------------------------------------------------------

// Pointwise rotations about a smooth axis field; ||Id - A|| peaks at `size`.
PhysicalField rotation_field(const Grid& g, double size) {
  const double tmax = 2.0 * std::asin(0.5 * size);
  const double k = kTwoPi / g.length(0);
  return sample(g, 9, [&](const double* x, double* a) {
    double n[3] = {std::sin(k * x[1]) + 0.3, std::cos(k * x[2]), 1.0 + 0.5 * std::sin(k * x[0])};
    const double nn = std::hypot(n[0], n[1], n[2]);
    for (double& e : n) e /= nn;
    const double th = tmax * std::sin(k * x[0]) * std::cos(k * (x[1] - x[2]));
    const double cs = std::cos(th), sn = std::sin(th);
    const double K[9] = {0, -n[2], n[1], n[2], 0, -n[0], -n[1], n[0], 0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double kk = 0.0;
        for (int l = 0; l < 3; ++l) kk += K[3 * i + l] * K[3 * l + j];
        a[3 * i + j] = (i == j ? 1.0 : 0.0) + sn * K[3 * i + j] + (1.0 - cs) * kk;
      }
  });
}

Runner twisted(const ExperimentConfig& c) {
  reject_roles(c, {"velocity", "forcing"});
  const Config& r = c.raw;
  const Grid g = Grid::cube(3, c.grid.n, c.grid.length);
  const std::string matrix = r.str("twisted.matrix", "flow-map");
  if (matrix != "flow-map" && matrix != "rotation")
    r.fail("twisted.matrix", "expected flow-map or rotation, got '" + matrix + "'");
  const double size = r.num("twisted.size", 0.2);
  TwistedDivOptions opt;
  opt.tol = r.num("twisted.tol", opt.tol);
  opt.max_sweeps = static_cast<int>(r.integer("twisted.max_sweeps", opt.max_sweeps));
  opt.gate = r.num("twisted.gate", opt.gate);
  opt.p = r.num("twisted.p", opt.p);
  GeneratorSpec fs = role(c, "forcing", "random-band");
  if (!c.init.count("forcing")) fs.params["divfree"] = 0.0;
  const PhysicalField r0 = generate(c, "forcing", fs, g, 3);
  const PhysicalField v = matrix == "flow-map"
                              ? generate(c, "velocity", role(c, "velocity", "taylor-green", 0.25), g, 3)
                              : PhysicalField(g, 3);
  if (matrix == "flow-map") check_cfl(c, {&v}, 0.5);
  const long nsteps = c.time.T > 0.0 ? step_count(c, c.time.dt) : 0;

  return [=](RunContext& ctx) {
    TwistedDivProblem pr;
    FlowMap fm(g);
    const VelocitySlice vs = make_slice(0.0, forward(v));
    const PhysicalField rot = matrix == "rotation" ? rotation_field(g, size) : PhysicalField(g, 9);
    for (long k = 0; k <= nsteps; ++k) {
      if (k > 0 && matrix == "flow-map") {
        VelocitySlice b = vs;
        b.t = k * c.time.dt;
        VelocitySlice a = vs;
        a.t = (k - 1) * c.time.dt;
        fm.step(a, b);
      }
      const double t = k * c.time.dt;
      pr.t.push_back(t);
      pr.a.push_back(matrix == "rotation" ? rot : fm.state().a);
      PhysicalField rt = r0;
      rt *= 1.0 + t;
      pr.r.push_back(rt);
    }
    const TwistedDivSolution sol = solve_twisted_div(pr, opt);
    for (std::size_t k = 0; k < sol.slices.size(); ++k) {
      const auto& s = sol.slices[k];
      ctx.out.series.add(pr.t[k], "sweeps", s.sweeps);
      ctx.out.series.add(pr.t[k], "contraction", s.contraction);
      ctx.out.series.add(pr.t[k], "residual", s.residual);
      ctx.out.series.add(pr.t[k], "z:L2", lp_norm(s.z, 2.0));
    }
    const DivLedger& l = sol.ledger;
    ctx.out.series.add(0.0, "ledger:gate", l.gate);
    ctx.out.series.add(0.0, "ledger:id_minus_a", l.id_minus_a);
    ctx.out.series.add(0.0, "ledger:C_R", l.c_r);
    ctx.out.series.add(0.0, "ledger:C_g", l.c_g);
    if (l.timed) ctx.out.series.add(0.0, "ledger:C_t", l.c_t);
    ctx.out.monitors = sol.monitors;
    ctx.snapshot("z_final", sol.slices.back().z);
  };
}

// ---- maximal regularity -----------------------------------------------------------------------

Runner stokes_maxreg(const ExperimentConfig& c) {
  reject_roles(c, {"velocity", "forcing"});
  const Config& r = c.raw;
  const Grid g = Grid::cube(3, c.grid.n, c.grid.length);
  const double p = r.num("maxreg.p", 4.0);
  const std::vector<double> horizons =
      r.has("maxreg.horizons") ? r.nums("maxreg.horizons") : std::vector<double>{c.time.T};
  const long draws = r.integer("maxreg.draws", 10);
  const double spread_tol = r.num("maxreg.spread", 2.0);
  if (!(p > 1.0)) r.fail("maxreg.p", "must exceed 1");
  if (draws < 1) r.fail("maxreg.draws", "must be >= 1");
  std::vector<double> hs = horizons;
  std::sort(hs.begin(), hs.end());
  for (double T : hs) {
    const long n = std::lround(T / c.time.dt);
    if (n < 1 || std::abs(n * c.time.dt - T) > 1e-9 * T)
      r.fail("maxreg.horizons", "every horizon must be a positive multiple of time.dt");
  }
  const PhysicalField u0 = generate(c, "velocity", role(c, "velocity", "zero"), g, 3);
  GeneratorSpec fs = role(c, "forcing", "random-band");
  if (!c.init.count("forcing")) fs.params["divfree"] = 0.0;
  std::vector<PhysicalField> forcing;
  for (long d = 0; d < draws; ++d) {
    GeneratorSpec s = fs;
    s.seed = fs.seed + static_cast<std::uint64_t>(d);
    forcing.push_back(generate(c, "forcing", s, g, 3));
  }

  return [=](RunContext& ctx) {
    double worst = 0.0;
    std::vector<double> sum(hs.size(), 0.0);
    for (long d = 0; d < draws; ++d) {
      const SpectralField f = forward(forcing[d]);
      const TimeForcing tf = [&](double) { return f; };
      // one trajectory to the longest horizon, cut at each horizon
      const StokesTrajectory full =
          stokes_solve(forward(u0), tf, c.time.dt, static_cast<int>(std::lround(hs.back() / c.time.dt)));
      double lo = kInf, hi = 0.0;
      for (std::size_t h = 0; h < hs.size(); ++h) {
        StokesTrajectory cut;
        const std::size_t n = static_cast<std::size_t>(std::lround(hs[h] / c.time.dt));
        cut.steps.assign(full.steps.begin(), full.steps.begin() + n + 1);
        cut.dissipation.assign(full.dissipation.begin(), full.dissipation.begin() + n + 1);
        const double ratio = maxreg_parts(cut, p).ratio();
        ctx.out.series.add(hs[h], "maxreg:ratio:draw" + std::to_string(d), ratio);
        sum[h] += ratio;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      worst = std::max(worst, hi / lo);
    }
    for (std::size_t h = 0; h < hs.size(); ++h)
      ctx.out.monitors.push_back(report_only("maxreg-ratio:T=" + fmt("%g", hs[h]),
                                             "ensemble mean of (sup ||u||_B + ||u_t, D^2 u, grad Q||_LpLp) / "
                                             "(||f||_LpLp + ||u0||_B)",
                                             sum[h] / draws, 0.0));
    ctx.out.monitors.push_back(bound_monitor("maxreg-spread",
                                             "max over draws of the ratio spread across horizons",
                                             worst, spread_tol));
  };
}

// ---- Euler-Lagrange -------------------------------------------------------------------------------

Runner euler_lagrange(const ExperimentConfig& c) {
  reject_roles(c, {"background", "density", "velocity"});
  const Config& r = c.raw;
  EulerLagrangeOptions eo;
  eo.div_tol = r.num("el.div_tol", eo.div_tol);
  eo.settle = r.num("el.settle", eo.settle);
  eo.cadence = c.time.cadence;
  const bool refine = r.flag("el.refine", false);
  const double order_floor = r.num("el.order", 1.8);
  const long nsteps = step_count(c, c.time.dt);
  Perturbation p = perturbation(c, c.grid.n, c.time.dt, "random-band");
  std::optional<Perturbation> fine;
  if (refine) fine = perturbation(c, 2 * c.grid.n, 0.5 * c.time.dt, "random-band");

  return [=](RunContext& ctx) {
    PerturbationSolver s(p.bg, p.h0, forward(p.w0), p.opt);
    const EulerLagrangeReport rep = euler_lagrange_consistency(s, nsteps, eo);
    ctx.out.series = rep.series;
    ctx.out.monitors = rep.monitors;
    if (!fine) return;
    PerturbationSolver sf(fine->bg, fine->h0, forward(fine->w0), fine->opt);
    const EulerLagrangeReport rf = euler_lagrange_consistency(sf, 2 * nsteps, eo);
    for (const std::string& name : rf.series.names())
      for (const auto& [t, v] : rf.series.get(name)) ctx.out.series.add(t, "fine:" + name, v);
    const double order = std::log2(rep.momentum_residual / rf.momentum_residual);
    MonitorReport m = floor_monitor("momentum-order",
                                    "log2 of the momentum residual ratio under joint dt and grid halving",
                                    order, order_floor);
    m.note = "residual " + fmt("%.4e", rep.momentum_residual) + " -> " + fmt("%.4e", rf.momentum_residual) +
             (rep.truncated || rf.truncated ? ", certified window truncated" : "");
    ctx.out.monitors.push_back(m);
    for (MonitorReport x : rf.monitors) {
      x.id = "fine:" + x.id;
      x.verdict = Verdict::kReportOnly;
      ctx.out.monitors.push_back(x);
    }
  };
}

}  // namespace

const std::vector<std::string>& monitor_registry(const std::string& kind) {
  static const std::vector<std::string> none;
  auto it = registry().find(kind);
  return it == registry().end() ? none : it->second;
}

Runner prepare(const ExperimentConfig& c) {
  if (c.kind == "hns2d") return hns2d(c);
  if (c.kind == "decay-probe") return decay_probe(c);
  if (c.kind == "ins3d-direct") return ins3d_direct(c);
  if (c.kind == "ins3d-picard") return ins3d_picard(c);
  if (c.kind == "patch") return patch(c);
  if (c.kind == "twisted-div") return twisted(c);
  if (c.kind == "stokes-maxreg") return stokes_maxreg(c);
  if (c.kind == "euler-lagrange") return euler_lagrange(c);
  throw ConfigError("unknown experiment kind '" + c.kind + "'");
}

}  // namespace nssl::detail

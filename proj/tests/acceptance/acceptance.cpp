// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance <config-dir> <output-dir> [--only 1,5,10]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nssl/error.hpp"
#include "nssl/estimates.hpp"
#include "nssl/harness.hpp"
#include "nssl/lagrangian.hpp"
#include "nssl/spectral.hpp"
#include "nssl/stokes.hpp"

using namespace nssl;
namespace fs = std::filesystem;

namespace {

std::string config_dir, out_dir;

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Check::require(bool cond, const char* fmt, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  ok = ok && cond;
  notes.push_back(std::string(cond ? "" : "!") + buf);
}

struct Run {
  RunManifest manifest;
  NormSeries series;
  std::string dir;

  const MonitorReport& monitor(const std::string& id) const {
    for (const auto& m : manifest.monitors)
      if (m.id == id) return m;
    throw NumericalError("monitor '" + id + "' missing from " + dir);
  }
  double lhs(const std::string& id) const { return monitor(id).lhs; }
  double first(const std::string& name) const { return series.values(name).front(); }
  double max(const std::string& name) const {
    const auto v = series.values(name);
    return *std::max_element(v.begin(), v.end());
  }
};

Run run(const std::string& name, const std::string& tag,
        const std::map<std::string, std::string>& overrides = {}) {
  Config c = Config::load((fs::path(config_dir) / (name + ".cfg")).string());
  for (const auto& [k, v] : overrides) c.set(k, v);
  const std::string dir = (fs::path(out_dir) / tag).string();
  fs::remove_all(dir);
  c.set("output.dir", dir);
  c.set("experiment.deterministic", "true");
  Run r{run_experiment(parse_experiment(c)), {}, dir};
  r.series = NormSeries::read_csv((fs::path(dir) / "series.csv").string());
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---- 1 -------------------------------------------------------------------

Check taylor_green() {
  Check c;
  const Run spatial = run("tg_spatial", "tg_spatial");
  c.require(spatial.lhs("taylor-green-error") <= 1e-10, "spatial error %.3g <= 1e-10",
            spatial.lhs("taylor-green-error"));
  const Run order = run("tg_order", "tg_order");
  c.require(order.lhs("temporal-order") >= 1.9, "order %.4f >= 1.9 over dt 4e-3, 2e-3, 1e-3",
            order.lhs("temporal-order"));
  return c;
}

// ---- 2 -------------------------------------------------------------------

Check inequalities() {
  Check c;
  const Run r2 = run("inequalities_2d", "inequalities_2d");
  c.require(r2.lhs("energy-inequality") <= 1e-6, "energy drift %.3g <= 1e-6", r2.lhs("energy-inequality"));
  double vort = 0.0;
  for (const char* p : {"2", "4", "6"}) vort = std::max(vort, r2.lhs(std::string("vorticity-Lp:") + p));
  c.require(vort <= 1e-3, "vorticity Lp rise %.3g <= 1e-3 (p = 2, 4, 6)", vort);
  c.require(r2.lhs("v3-maximum-principle") <= 1e-3, "v3 Linf rise %.3g <= 1e-3",
            r2.lhs("v3-maximum-principle"));
  const Run r3 = run("inequalities_3d", "inequalities_3d");
  const double l2 = r3.lhs("density-conservation:L2"), li = r3.lhs("density-conservation:Linf");
  c.require(std::max(l2, li) <= 1e-2, "h drift L2 %.3g, Linf %.3g <= 1e-2", l2, li);
  return c;
}

// ---- 3 -------------------------------------------------------------------

Check decay() {
  Check c;
  const Run r = run("decay", "decay");
  const struct {
    const char* id;
    double tol;
  } fits[] = {{"decay-slope:v", 0.1}, {"decay-slope:grad_v", 0.1}, {"decay-slope:dtv", 0.15}};
  for (const auto& f : fits) {
    const MonitorReport& m = r.monitor(f.id);
    c.require(m.lhs <= f.tol, "%s off by %.4f <= %g (%s)", f.id + 12, m.lhs, f.tol, m.note.c_str());
  }
  c.require(r.monitor("heat-oracle").verdict == Verdict::kPass, "heat-kernel oracle gap %.3g <= %g",
            r.lhs("heat-oracle"), r.monitor("heat-oracle").rhs);
  c.require(true, "%s", r.monitor("contamination").note.c_str());
  return c;
}

// ---- 4 -------------------------------------------------------------------

void rigid_rotation(double, const double* x, double* v, double* g) {
  v[0] = -x[1];
  v[1] = x[0];
  v[2] = 0.0;
  std::fill(g, g + 9, 0.0);
  g[1] = -1.0;
  g[3] = 1.0;
}

void cellular(double, const double* x, double* v, double* g) {
  const double s0 = std::sin(x[0]), c0 = std::cos(x[0]), s1 = std::sin(x[1]), c1 = std::cos(x[1]);
  v[0] = s0 * c1 + 0.3 * std::sin(x[2]);
  v[1] = -c0 * s1;
  v[2] = 0.5 * s0;
  std::fill(g, g + 9, 0.0);
  g[0] = c0 * c1;
  g[1] = -s0 * s1;
  g[2] = 0.3 * std::cos(x[2]);
  g[3] = s0 * s1;
  g[4] = -c0 * c1;
  g[6] = 0.5 * c0;
}

double max_det_dev(const FlowMapState& s) {
  double m = 0.0;
  for (double d : s.det.component(0)) m = std::max(m, std::abs(d - 1.0));
  return m;
}

Check lagrangian() {
  Check c;
  const Grid g = Grid::cube(3, 16);
  const double T = 1.0;
  const FlowMapState rot = integrate_flow(rigid_rotation, g, 1e-3, T);
  const double cs = std::cos(T), sn = std::sin(T);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const int i0 = static_cast<int>(p / 256), i1 = static_cast<int>((p / 16) % 16);
    const double y0 = g.coord(0, i0), y1 = g.coord(1, i1);
    err = std::max(err, std::abs(y0 + rot.displacement.component(0)[p] - (cs * y0 - sn * y1)));
    err = std::max(err, std::abs(y1 + rot.displacement.component(1)[p] - (sn * y0 + cs * y1)));
    err = std::max(err, std::abs(rot.displacement.component(2)[p]));
  }
  c.require(err <= 1e-8, "rotation flow map error %.3g <= 1e-8 at t = 1, dt = 1e-3", err);
  c.require(max_det_dev(rot) <= 1e-6, "rotation |det - 1| %.3g <= 1e-6", max_det_dev(rot));

  const FlowMapState cell = integrate_flow(cellular, g, 1e-3, 0.3);
  c.require(cell.certified && cell.lip_budget <= 0.5, "cellular lip budget %.4f <= 1/2", cell.lip_budget);
  c.require(max_det_dev(cell) <= 1e-6, "cellular |det - 1| %.3g <= 1e-6", max_det_dev(cell));
  const JacobianInverse ji = invert_jacobian(cell.grad_x, 40);
  const double prod = product_identity_error(cell.grad_x, ji.a);
  c.require(prod <= 1e-8, "||grad X A - Id|| %.3g <= 1e-8", prod);
  double worst = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double q = 0.0;
    for (int k = 0; k < 9; ++k) {
      const double d = ji.a.component(k)[p] - (k % 4 == 0 ? 1.0 : 0.0);
      q += d * d;
    }
    worst = std::max(worst, std::sqrt(q) / (2.0 * cell.lip_budget));
  }
  c.require(worst <= 1.0, "max ||A - Id|| / (2 lip_budget) %.4f <= 1", worst);
  return c;
}

// ---- 5 -------------------------------------------------------------------

Check twisted() {
  Check c;
  const Run a = run("twisted_rotation", "twisted_32", {{"grid.n", "32"}});
  const Run b = run("twisted_rotation", "twisted_48", {{"grid.n", "48"}});
  for (const Run* r : {&a, &b}) {
    const char* n = r == &a ? "32" : "48";
    c.require(std::abs(r->first("ledger:id_minus_a") - 0.2) <= 1e-6, "%s^3 ||Id - A|| %.6f", n,
              r->first("ledger:id_minus_a"));
    c.require(r->lhs("twisted-contraction") <= 0.25, "%s^3 contraction %.4f <= 0.25", n,
              r->lhs("twisted-contraction"));
    c.require(r->lhs("twisted-residual") <= 1e-8, "%s^3 residual %.3g <= 1e-8", n, r->lhs("twisted-residual"));
  }
  for (const char* k : {"ledger:C_R", "ledger:C_g", "ledger:C_t"}) {
    const double x = a.first(k), y = b.first(k);
    c.require(std::abs(y / x - 1.0) <= 0.2, "%s %.5f -> %.5f within 20%%", k + 7, x, y);
  }
  return c;
}

// ---- 6 -------------------------------------------------------------------

Check picard() {
  Check c;
  const Run r = run("picard", "picard");
  c.require(r.lhs("picard-contraction") <= 0.75, "max I_{n+1}/I_n %.3g <= 0.75", r.lhs("picard-contraction"));
  const MonitorReport& gap = r.monitor("picard-direct-gap");
  c.require(gap.lhs <= gap.rhs, "gap to direct %.3g <= max(tol, 10 truncation) = %.3g", gap.lhs, gap.rhs);
  return c;
}

// ---- 7 -------------------------------------------------------------------

Check euler_lagrange() {
  Check c;
  const Run r = run("euler_lagrange", "euler_lagrange");
  c.require(r.lhs("frozen-density") <= 1e-4, "24^3 ||h(t, X) - h0||_L2 %.3g <= 1e-4", r.lhs("frozen-density"));
  c.require(r.lhs("fine:frozen-density") <= 1e-4, "48^3 ||h(t, X) - h0||_L2 %.3g <= 1e-4",
            r.lhs("fine:frozen-density"));
  const MonitorReport& o = r.monitor("momentum-order");
  c.require(o.lhs >= 1.8, "momentum residual order %.3f >= 1.8 (%s)", o.lhs, o.note.c_str());
  return c;
}

// ---- 8 -------------------------------------------------------------------

double response(const Run& r) {
  const double w0 = r.first("w:L2"), h0 = r.first("h:L2");
  return r.max("w:L2") / std::hypot(w0, h0);
}

Check stability() {
  Check c;
  const Run a = run("stability", "stability_full");
  const Run b = run("stability", "stability_half", {{"init.density.amplitude", "5e-4"}});
  const double ra = response(a), rb = response(b);
  c.require(std::isfinite(ra) && std::isfinite(rb), "sup ||w|| / ||(w0, h0)|| = %.5f at 1e-3, %.5f at 5e-4",
            ra, rb);
  c.require(std::abs(ra / rb - 1.0) <= 0.1, "linear response change %.3g <= 0.1", std::abs(ra / rb - 1.0));
  for (const Run* r : {&a, &b}) {
    const MonitorReport& m = r->monitor("density-bound");
    c.require(m.verdict == Verdict::kPass, "density bound %.4g <= %.4g (1e-2 slack)", m.lhs, m.rhs);
  }
  return c;
}

// ---- 9 -------------------------------------------------------------------

double closed_form_error(const SpectralField& u0, const SpectralField& f, double expect) {
  const double dt = 1e-3, T = 1.0, p = 4.0;
  const TimeForcing tf = [&](double) { return f; };
  const StokesTrajectory traj = stokes_solve(u0, tf, dt, static_cast<int>(std::lround(T / dt)));
  return std::abs(maxreg_parts(traj, p).ratio() / expect - 1.0);
}

Check maxreg() {
  Check c;
  const Grid g = Grid::cube(3, 16);
  const double p = 4.0, k2 = 4.0, T = 1.0;
  const double ell = std::pow(2.0, 2.0 - 2.0 / p);
  const SpectralField mode = forward(sample(g, 3, [](const double* x, double* o) {
    o[0] = std::sin(2.0 * x[1]);
    o[1] = o[2] = 0.0;
  }));
  const SpectralField zero(g, 3);

  // free decay of a single mode
  const double decay = (ell + 2.0 * k2 * std::pow((1.0 - std::exp(-p * k2 * T)) / (p * k2), 1.0 / p)) / ell;
  const double e1 = closed_form_error(mode, zero, decay);
  c.require(e1 <= 0.02, "free decay ratio off by %.2e <= 0.02", e1);

  // steady single-mode forcing from rest: u = (1 - e^{-k2 t}) / k2 sin(2 x2) e1
  double hess = T;
  for (int m = 1, binom = 4, sign = -1; m <= 4; ++m, binom = binom * (4 - m + 1) / m, sign = -sign)
    hess += sign * binom * (1.0 - std::exp(-m * k2 * T)) / (m * k2);
  const double forced = (ell * (1.0 - std::exp(-k2 * T)) / k2 +
                         std::pow((1.0 - std::exp(-p * k2 * T)) / (p * k2), 1.0 / p) + std::pow(hess, 1.0 / p)) /
                        std::pow(T, 1.0 / p);
  const double e2 = closed_form_error(zero, mode, forced);
  c.require(e2 <= 0.02, "forced ratio off by %.2e <= 0.02", e2);

  // gradient forcing is absorbed by the pressure: ratio 1
  const SpectralField grad = forward(sample(g, 3, [](const double* x, double* o) {
    o[0] = -2.0 * std::sin(2.0 * x[0]);
    o[1] = o[2] = 0.0;
  }));
  const double e3 = closed_form_error(zero, grad, 1.0);
  c.require(e3 <= 0.02, "gradient-forcing ratio off by %.2e <= 0.02", e3);

  const Run r = run("maxreg", "maxreg");
  c.require(r.lhs("maxreg-spread") <= 2.0, "ensemble spread %.4f <= 2 over T = 1, 2, 4", r.lhs("maxreg-spread"));
  return c;
}

// ---- 10 ------------------------------------------------------------------

Check determinism() {
  Check c;
  for (const char* name : {"tg_order", "twisted_rotation", "picard"}) {
    run(name, std::string("det_a_") + name);
    run(name, std::string("det_b_") + name);
    const std::string a = slurp((fs::path(out_dir) / (std::string("det_a_") + name) / "series.csv").string());
    const std::string b = slurp((fs::path(out_dir) / (std::string("det_b_") + name) / "series.csv").string());
    c.require(!a.empty() && a == b, "%s series.csv %s (%zu bytes)", name, a == b ? "bitwise equal" : "differs",
              a.size());
  }
  return c;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Check()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string only;
  app.add_option("configs", config_dir, "acceptance config directory")->required()->check(CLI::ExistingDirectory);
  app.add_option("out", out_dir, "output root")->required();
  app.add_option("--only", only, "comma-separated criterion numbers");
  CLI11_PARSE(app, argc, argv);

  std::set<int> pick;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) pick.insert(std::stoi(tok));

  const Criterion all[] = {
      {1, "taylor-green convergence", 60, taylor_green},
      {2, "inequality suite", 600, inequalities},
      {3, "decay-rate fits", 600, decay},
      {4, "lagrangian suite", 120, lagrangian},
      {5, "twisted divergence", 120, twisted},
      {6, "picard contraction", 600, picard},
      {7, "euler-lagrange consistency", 600, euler_lagrange},
      {8, "stability linear response", 1200, stability},
      {9, "maximal-regularity ratio", 300, maxreg},
      {10, "determinism", 600, determinism},
  };

  fs::create_directories(out_dir);
  int failed = 0;
  for (const Criterion& cr : all) {
    if (!pick.empty() && !pick.count(cr.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.notes.push_back(std::string("!error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char budget[96];
    std::snprintf(budget, sizeof budget, "runtime %.1fs <= %.0fs", secs, cr.budget_s);
    c.require(secs <= cr.budget_s, "%s", budget);
    std::string detail;
    for (const auto& n : c.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("criterion %2d %s  %s: %s\n", cr.id, c.ok ? "PASS" : "FAIL", cr.name, detail.c_str());
    std::fflush(stdout);
    failed += c.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

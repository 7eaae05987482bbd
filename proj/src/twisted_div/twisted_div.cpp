#include "nssl/twisted_div.hpp"

#include <cmath>
#include <string>

#include "../lagrangian/matrix.hpp"
#include "nssl/error.hpp"
#include "nssl/lagrangian.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

namespace {

double l2(const PhysicalField& f) {
  double s = 0.0;
  for (double x : f.data()) s += x * x;
  return std::sqrt(s * f.grid().cell_volume());
}

void require_pair(const PhysicalField& a, const PhysicalField& z, const char* who) {
  const int nd = z.grid().ndim();
  if (!(a.grid() == z.grid()) || a.ncomp() != nd * nd || z.ncomp() != nd)
    throw ConfigError(std::string(who) + ": need an ndim x ndim matrix field and an ndim vector field on one grid");
}

// M z pointwise.
PhysicalField apply(const PhysicalField& m, const PhysicalField& z) {
  const int nd = z.grid().ndim();
  PhysicalField out(z.grid(), nd);
  for (std::size_t p = 0; p < z.points(); ++p)
    for (int i = 0; i < nd; ++i) {
      double s = 0.0;
      for (int j = 0; j < nd; ++j) s += m.component(i * nd + j)[p] * z.component(j)[p];
      out.component(i)[p] = s;
    }
  return out;
}

// (Id - A) z + R pointwise.
PhysicalField twisted_flux(const PhysicalField& z, const PhysicalField& a, const PhysicalField& r) {
  const int nd = z.grid().ndim();
  PhysicalField f(z.grid(), nd);
  for (std::size_t p = 0; p < z.points(); ++p)
    for (int i = 0; i < nd; ++i) {
      double s = z.component(i)[p] + r.component(i)[p];
      for (int j = 0; j < nd; ++j) s -= a.component(i * nd + j)[p] * z.component(j)[p];
      f.component(i)[p] = s;
    }
  return f;
}

// max over points of ||M - pad Id|| (operator 2-norm), pad in {0, 1}.
double max_op_norm(const PhysicalField& m, double pad) {
  const int nd = m.grid().ndim();
  double out = 0.0;
  for (std::size_t p = 0; p < m.points(); ++p) {
    double e[9];
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) e[i * nd + j] = m.component(i * nd + j)[p] - (i == j ? pad : 0.0);
    out = std::max(out, detail::op_norm(detail::load(e, nd, 0.0)));
  }
  return out;
}

// Second-order finite differences in time (one-sided at the ends).
std::vector<PhysicalField> time_derivative(const std::vector<double>& t,
                                           const std::vector<PhysicalField>& f) {
  const std::size_t n = f.size();
  std::vector<PhysicalField> out;
  for (std::size_t k = 0; k < n; ++k) {
    PhysicalField d = f[0];
    if (n < 2) {
      d *= 0.0;
    } else if (n == 2) {
      d = f[1];
      d -= f[0];
      d *= 1.0 / (t[1] - t[0]);
    } else {
      // three-point Lagrange derivative on a possibly uneven stencil
      const std::size_t c = std::clamp<std::size_t>(k, 1, n - 2);
      const double t0 = t[c - 1], t1 = t[c], t2 = t[c + 1], x = t[k];
      const double w0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
      const double w1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
      const double w2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
      auto a = f[c - 1].data(), b = f[c].data(), e = f[c + 1].data();
      auto o = d.data();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = w0 * a[i] + w1 * b[i] + w2 * e[i];
    }
    out.push_back(std::move(d));
  }
  return out;
}

TwistedDivSlice solve_slice(const PhysicalField& a, const PhysicalField& r, const PhysicalField& g,
                            const TwistedDivOptions& opt, double t) {
  TwistedDivSlice s{PhysicalField(r.grid(), r.ncomp()), {}, 0.0, 0.0, 0};
  const double floor = 1e-13 * std::max(1.0, l2(r));
  int growth = 0;
  for (int k = 1; k <= opt.max_sweeps; ++k) {
    PhysicalField next = psi_apply(s.z, a, r);
    PhysicalField d = next;
    d -= s.z;
    const double diff = l2(d);
    s.z = std::move(next);
    s.sweeps = k;
    if (!s.diffs.empty() && s.diffs.back() > floor) {
      const double ratio = diff / s.diffs.back();
      s.contraction = std::max(s.contraction, ratio);
      growth = ratio >= 1.0 ? growth + 1 : 0;
    }
    s.diffs.push_back(diff);
    if (diff <= opt.tol) break;
    if (growth >= 3)
      throw NonContractionError("twisted-div: sweeps stopped contracting at t = " + std::to_string(t) +
                                " (ratio " + std::to_string(s.contraction) + ")");
    if (k == opt.max_sweeps)
      throw NonContractionError("twisted-div: no convergence in " + std::to_string(k) +
                                " sweeps at t = " + std::to_string(t) + ", last difference " +
                                std::to_string(diff));
  }
  PhysicalField res = twisted_divergence(a, s.z);
  res -= g;
  s.residual = l2(res);
  return s;
}

}  // namespace

PhysicalField psi_apply(const PhysicalField& z, const PhysicalField& a, const PhysicalField& r) {
  require_pair(a, z, "psi_apply");
  if (!(r.grid() == z.grid()) || r.ncomp() != z.ncomp())
    throw ConfigError("psi_apply: R must match z");
  return inverse(gradient_part(forward(twisted_flux(z, a, r))));
}

PhysicalField twisted_divergence(const PhysicalField& a, const PhysicalField& z) {
  require_pair(a, z, "twisted_divergence");
  return inverse(divergence(forward(apply(a, z))));
}

PhysicalField twisted_divergence_contracted(const PhysicalField& a, const PhysicalField& z) {
  require_pair(a, z, "twisted_divergence_contracted");
  const int nd = z.grid().ndim();
  const PhysicalField gz = inverse(gradient_tensor(forward(z)));  // d_j z_i at i*nd + j
  PhysicalField out(z.grid(), 1);
  for (std::size_t p = 0; p < z.points(); ++p) {
    double s = 0.0;
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) s += a.component(i * nd + j)[p] * gz.component(j * nd + i)[p];
    out.component(0)[p] = s;
  }
  return out;
}

double id_minus_a_norm(const PhysicalField& a) {
  const int nd = a.grid().ndim();
  if (a.ncomp() != nd * nd) throw ConfigError("id_minus_a_norm: expected a matrix field");
  return max_op_norm(a, 1.0);
}

TwistedDivSolution solve_twisted_div(const TwistedDivProblem& pr, const TwistedDivOptions& opt) {
  const std::size_t n = pr.t.size();
  if (n == 0 || pr.a.size() != n || pr.r.size() != n || (!pr.g.empty() && pr.g.size() != n))
    throw ConfigError("twisted-div: A, R (and g) need one field per time");
  for (std::size_t k = 1; k < n; ++k)
    if (!(pr.t[k] > pr.t[k - 1])) throw ConfigError("twisted-div: times must increase");
  if (!(opt.p > pr.r.front().grid().ndim())) throw ConfigError("twisted-div: p must exceed ndim");
  if (!(opt.tol > 0.0) || opt.max_sweeps < 1) throw ConfigError("twisted-div: bad tolerance or sweep cap");

  std::vector<PhysicalField> g;
  for (std::size_t k = 0; k < n; ++k) {
    require_pair(pr.a[k], pr.r[k], "twisted-div");
    const PhysicalField det = determinant(pr.a[k]);
    double dev = 0.0;
    for (double d : det.component(0)) dev = std::max(dev, std::abs(d - 1.0));
    if (dev > opt.det_tol)
      throw ConfigError("twisted-div: |det A - 1| = " + std::to_string(dev) + " at t = " +
                        std::to_string(pr.t[k]) + " exceeds " + std::to_string(opt.det_tol));
    PhysicalField divr = inverse(divergence(forward(pr.r[k])));
    if (!pr.g.empty()) {
      PhysicalField d = pr.g[k];
      d -= divr;
      if (l2(d) > 1e-10)
        throw ConfigError("twisted-div: g differs from div R by " + std::to_string(l2(d)) +
                          " at t = " + std::to_string(pr.t[k]));
      g.push_back(pr.g[k]);
    } else {
      g.push_back(std::move(divr));
    }
  }

  TwistedDivSolution sol;
  DivLedger& L = sol.ledger;
  const std::vector<PhysicalField> at = time_derivative(pr.t, pr.a);
  std::vector<double> at_inf;
  for (std::size_t k = 0; k < n; ++k) {
    L.id_minus_a = std::max(L.id_minus_a, id_minus_a_norm(pr.a[k]));
    at_inf.push_back(max_op_norm(at[k], 0.0));
  }
  L.timed = n >= 2;
  L.a_t = L.timed ? time_norm(pr.t, at_inf, 2.0) : 0.0;
  L.gate = L.id_minus_a + L.a_t;
  if (L.gate > opt.gate)
    throw CertifiedRegionError("twisted-div: ||Id - A||_Linf + ||A_t||_L2(Linf) = " +
                                   std::to_string(L.gate) + " exceeds the gate " +
                                   std::to_string(opt.gate),
                               L.gate);

  for (std::size_t k = 0; k < n; ++k) {
    sol.slices.push_back(solve_slice(pr.a[k], pr.r[k], g[k], opt, pr.t[k]));
    sol.max_contraction = std::max(sol.max_contraction, sol.slices.back().contraction);
    sol.max_residual = std::max(sol.max_residual, sol.slices.back().residual);
  }

  // estimate ledger
  std::vector<double> z2, r2, gz2, g2;
  for (std::size_t k = 0; k < n; ++k) {
    const PhysicalField& z = sol.slices[k].z;
    z2.push_back(l2(z));
    r2.push_back(l2(pr.r[k]));
    gz2.push_back(l2(inverse(gradient_tensor(forward(z)))));
    g2.push_back(l2(g[k]));
  }
  L.z_sup = time_norm(pr.t, z2, kInf);
  L.r_sup = time_norm(pr.t, r2, kInf);
  L.c_r = L.r_sup > 0.0 ? L.z_sup / L.r_sup : 0.0;
  if (L.timed) {
    L.grad_z = time_norm(pr.t, gz2, 2.0);
    L.g_norm = time_norm(pr.t, g2, 2.0);
    L.c_g = L.g_norm > 0.0 ? L.grad_z / L.g_norm : 0.0;

    std::vector<PhysicalField> zs;
    for (const auto& s : sol.slices) zs.push_back(s.z);
    const std::vector<PhysicalField> zt = time_derivative(pr.t, zs);
    const std::vector<PhysicalField> rt = time_derivative(pr.t, pr.r);
    std::vector<SpectralField> part_a, part_b, part_r;
    for (std::size_t k = 0; k < n; ++k) {
      // b = P(-A_t z), a = z_t - b
      SpectralField b = gradient_part(forward(apply(at[k], zs[k])));
      b *= -1.0;
      SpectralField a = forward(zt[k]);
      a -= b;
      part_a.push_back(std::move(a));
      part_b.push_back(std::move(b));
      part_r.push_back(forward(rt[k]));
    }
    L.zt_a = sumspace_norm(pr.t, part_a, {}, opt.p);
    L.zt_b = sumspace_norm(pr.t, {}, part_b, opt.p);
    L.rt_norm = sumspace_norm(pr.t, part_r, {}, opt.p);
    const double rhs = L.r_sup + L.rt_norm;
    L.c_t = rhs > 0.0 ? (L.zt_a + L.zt_b) / rhs : 0.0;
  }

  const std::string gate_note = "gate = " + std::to_string(L.gate) + " (limit " +
                                std::to_string(opt.gate) + ", engineering choice)";
  MonitorReport m = bound_monitor("twisted-contraction",
                                  "sweep ratio against ||Id - A||_Linf + 0.05", sol.max_contraction,
                                  L.id_minus_a + 0.05);
  m.note = gate_note;
  sol.monitors.push_back(m);
  sol.monitors.push_back(bound_monitor("twisted-residual", "max_t ||div(A z) - g||_L2",
                                       sol.max_residual, std::max(1e-8, 100.0 * opt.tol)));
  sol.monitors.push_back(report_only("div-estimate-R", "||z||_Linf(L2) against ||R||_Linf(L2)",
                                     L.z_sup, L.r_sup));
  if (L.timed) {
    sol.monitors.push_back(report_only("div-estimate-g", "||grad z||_L2(L2) against ||g||_L2(L2)",
                                       L.grad_z, L.g_norm));
    MonitorReport mt = report_only("div-estimate-t",
                                   "||z_t||_N against ||R||_Linf(L2) + ||R_t||_L(2p/(2p-n))(L(2p/(p+2)))",
                                   L.zt_a + L.zt_b, L.r_sup + L.rt_norm);
    mt.note = "split: a-part " + std::to_string(L.zt_a) + ", L2(L2) part " + std::to_string(L.zt_b) +
              " (upper bound of the infimum)";
    sol.monitors.push_back(mt);
  }
  return sol;
}

TwistedDivSolution z1_solve(const std::vector<double>& t, const std::vector<PhysicalField>& a1,
                            const std::vector<PhysicalField>& a2,
                            const std::vector<PhysicalField>& w2, const TwistedDivOptions& opt) {
  if (a1.size() != t.size() || a2.size() != t.size() || w2.size() != t.size())
    throw ConfigError("z1: A1, A2 and w2 need one field per time");
  TwistedDivProblem pr;
  pr.t = t;
  pr.a = a1;
  for (std::size_t k = 0; k < t.size(); ++k) {
    PhysicalField d = a1[k];
    d -= a2[k];
    require_pair(d, w2[k], "z1");
    pr.r.push_back(apply(d, w2[k]));
  }
  return solve_twisted_div(pr, opt);
}

}  // namespace nssl

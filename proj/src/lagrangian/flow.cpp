#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "matrix.hpp"
#include "nssl/error.hpp"
#include "nssl/interp.hpp"
#include "nssl/lagrangian.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

namespace {

using detail::Mat;

void require_matrix_field(const PhysicalField& m, const char* who) {
  const int nd = m.grid().ndim();
  if (nd < 2 || nd > 3 || m.ncomp() != nd * nd)
    throw ConfigError(std::string(who) + ": expected an ndim x ndim matrix field on a 2D or 3D grid");
}

// Slice fields blended linearly in time at fraction theta.
struct Blend {
  std::vector<double> data;  // v then grad, component-major
  std::vector<std::span<const double>> spans;
};

Blend blend(const VelocitySlice& a, const VelocitySlice& b, double theta) {
  Blend out;
  const std::size_t nv = a.v.data().size(), ng = a.grad.data().size();
  out.data.resize(nv + ng);
  auto av = a.v.data(), bv = b.v.data(), ag = a.grad.data(), bg = b.grad.data();
  for (std::size_t i = 0; i < nv; ++i) out.data[i] = (1.0 - theta) * av[i] + theta * bv[i];
  for (std::size_t i = 0; i < ng; ++i) out.data[nv + i] = (1.0 - theta) * ag[i] + theta * bg[i];
  const int nc = a.v.ncomp() + a.grad.ncomp();
  out.spans = component_spans(out.data, a.v.points(), nc);
  return out;
}

void require_slices(const VelocitySlice& a, const VelocitySlice& b, const Grid& labels) {
  const int nd = labels.ndim();
  if (!(a.v.grid() == b.v.grid()) || a.v.grid().ndim() != nd || a.v.ncomp() != nd ||
      b.v.ncomp() != nd || a.grad.ncomp() != nd * nd || b.grad.ncomp() != nd * nd)
    throw ConfigError("flow map: velocity slices must carry ndim components on a grid of the label dimension");
  if (!(b.t > a.t)) throw ConfigError("flow map: slice times must increase");
}

}  // namespace

VelocitySlice make_slice(double t, const SpectralField& v) {
  return VelocitySlice{t, inverse(v), inverse(gradient_tensor(v))};
}

FlowMap::FlowMap(Grid labels)
    : labels_(labels),
      s_{PhysicalField(labels, labels.ndim()),
         PhysicalField(labels, labels.ndim() * labels.ndim()),
         PhysicalField(labels, labels.ndim() * labels.ndim()), PhysicalField(labels, 1)} {
  const int nd = labels.ndim();
  if (nd < 2 || nd > 3) throw ConfigError("flow map: labels must form a 2D or 3D grid");
  for (int i = 0; i < nd; ++i) {
    for (double& x : s_.grad_x.component(i * nd + i)) x = 1.0;
    for (double& x : s_.a.component(i * nd + i)) x = 1.0;
  }
  for (double& x : s_.det.component(0)) x = 1.0;
}

// eval(c, x, v, grad) samples the velocity at time t + c dt, c in {0, 1/2, 1}.
template <class Eval>
void FlowMap::rk4(const Eval& eval, double dt) {
  const int nd = labels_.ndim(), nm = nd * nd;
  const std::size_t n = labels_.size();
  static constexpr double kC[4] = {0.0, 0.5, 0.5, 1.0};
  static constexpr double kW[4] = {1.0, 2.0, 2.0, 1.0};
  double lag_max[4] = {0, 0, 0, 0}, eul_max[4] = {0, 0, 0, 0};

  for (std::size_t p = 0; p < n; ++p) {
    // label coordinates
    std::size_t r = p;
    double y[3] = {0, 0, 0};
    for (int a = nd - 1; a >= 0; --a) {
      y[a] = labels_.coord(a, static_cast<int>(r % labels_.dim(a)));
      r /= labels_.dim(a);
    }
    double d0[3], g0[9];
    for (int i = 0; i < nd; ++i) d0[i] = s_.displacement.component(i)[p];
    for (int k = 0; k < nm; ++k) g0[k] = s_.grad_x.component(k)[p];

    double dacc[3] = {0, 0, 0}, gacc[9] = {0};
    double kd[3] = {0, 0, 0}, kg[9] = {0};
    for (int st = 0; st < 4; ++st) {
      double x[3], ds[3], gs[9];
      const double f = st == 0 ? 0.0 : (st == 3 ? 1.0 : 0.5);
      for (int i = 0; i < nd; ++i) {
        ds[i] = d0[i] + f * dt * kd[i];
        x[i] = y[i] + ds[i];
      }
      for (int k = 0; k < nm; ++k) gs[k] = g0[k] + f * dt * kg[k];
      double v[3], gv[9];
      eval(kC[st], x, v, gv);
      for (int i = 0; i < nd; ++i) kd[i] = v[i];
      double fro = 0.0;
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) {
          double s = 0.0;
          for (int l = 0; l < nd; ++l) s += gv[i * nd + l] * gs[l * nd + j];
          kg[i * nd + j] = s;
          fro += s * s;
        }
      lag_max[st] = std::max(lag_max[st], std::sqrt(fro));
      eul_max[st] = std::max(eul_max[st], detail::op_norm(detail::load(gv, nd, 0.0)));
      for (int i = 0; i < nd; ++i) dacc[i] += kW[st] * kd[i];
      for (int k = 0; k < nm; ++k) gacc[k] += kW[st] * kg[k];
    }
    for (int i = 0; i < nd; ++i) s_.displacement.component(i)[p] = d0[i] + dt / 6.0 * dacc[i];
    for (int k = 0; k < nm; ++k) s_.grad_x.component(k)[p] = g0[k] + dt / 6.0 * gacc[k];
  }
  for (int st = 0; st < 4; ++st) {
    s_.lip_budget += dt / 6.0 * kW[st] * lag_max[st];
    s_.eulerian_lip += dt / 6.0 * kW[st] * eul_max[st];
  }
  s_.t += dt;
  finish_step();
}

void FlowMap::finish_step() {
  const int nd = labels_.ndim();
  const std::size_t n = labels_.size();
  double gmax = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double g[9];
    for (int k = 0; k < nd * nd; ++k) g[k] = s_.grad_x.component(k)[p];
    const Mat m = detail::load(g, nd, 1.0);
    const Mat a = m.inverse();
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) s_.a.component(i * nd + j)[p] = a(i, j);
    const double det = m.determinant();
    if (!std::isfinite(det)) throw NumericalError("flow map: non-finite Jacobian");
    s_.det.component(0)[p] = det;
    gmax = std::max(gmax, detail::op_norm(m));
  }
  s_.gradx_norm = gmax;
  if (s_.lip_budget > 0.5) s_.certified = false;
}

void FlowMap::step(const VelocitySlice& a, const VelocitySlice& b) {
  require_slices(a, b, labels_);
  const double dt = b.t - a.t;
  const int nd = labels_.ndim();
  const Blend bl[3] = {blend(a, b, 0.0), blend(a, b, 0.5), blend(a, b, 1.0)};
  const CubicInterpolator ip(a.v.grid());
  rk4(
      [&](double c, const double* x, double* v, double* g) {
        const Blend& f = bl[c == 0.0 ? 0 : (c == 1.0 ? 2 : 1)];
        double out[12];
        ip.eval(f.spans, x, out);
        for (int i = 0; i < nd; ++i) v[i] = out[i];
        for (int k = 0; k < nd * nd; ++k) g[k] = out[nd + k];
      },
      dt);
}

void FlowMap::step(const PointVelocity& v, double dt) {
  if (!(dt > 0.0)) throw ConfigError("flow map: dt must be positive");
  const double t0 = s_.t;
  rk4([&](double c, const double* x, double* u, double* g) { v(t0 + c * dt, x, u, g); }, dt);
}

FlowMapState integrate_flow(const PointVelocity& v, const Grid& labels, double dt, double T) {
  const long nsteps = std::lround(T / dt);
  if (!(dt > 0.0) || nsteps < 0 || std::abs(nsteps * dt - T) > 1e-9 * std::max(T, dt))
    throw ConfigError("integrate_flow: T must be a non-negative multiple of dt");
  FlowMap fm(labels);
  for (long n = 0; n < nsteps; ++n) fm.step(v, dt);
  return fm.state();
}

PhysicalField exact_inverse(const PhysicalField& m) {
  require_matrix_field(m, "exact_inverse");
  const int nd = m.grid().ndim();
  PhysicalField out(m.grid(), nd * nd);
  for (std::size_t p = 0; p < m.points(); ++p) {
    double g[9];
    for (int k = 0; k < nd * nd; ++k) g[k] = m.component(k)[p];
    const Mat mi = detail::load(g, nd, 1.0);
    if (std::abs(mi.determinant()) < 1e-300) throw NumericalError("exact_inverse: singular matrix");
    const Mat a = mi.inverse();
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) out.component(i * nd + j)[p] = a(i, j);
  }
  return out;
}

PhysicalField determinant(const PhysicalField& m) {
  require_matrix_field(m, "determinant");
  const int nd = m.grid().ndim();
  PhysicalField out(m.grid(), 1);
  for (std::size_t p = 0; p < m.points(); ++p) {
    double g[9];
    for (int k = 0; k < nd * nd; ++k) g[k] = m.component(k)[p];
    out.component(0)[p] = detail::load(g, nd, 1.0).determinant();
  }
  return out;
}

double product_identity_error(const PhysicalField& m1, const PhysicalField& m2) {
  require_matrix_field(m1, "product_identity_error");
  require_matrix_field(m2, "product_identity_error");
  if (!(m1.grid() == m2.grid())) throw ConfigError("product_identity_error: grids differ");
  const int nd = m1.grid().ndim();
  double worst = 0.0;
  for (std::size_t p = 0; p < m1.points(); ++p) {
    double s = 0.0;
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) {
        double e = i == j ? -1.0 : 0.0;
        for (int l = 0; l < nd; ++l) e += m1.component(i * nd + l)[p] * m2.component(l * nd + j)[p];
        s += e * e;
      }
    worst = std::max(worst, s);
  }
  return std::sqrt(worst);
}

JacobianInverse invert_jacobian(const PhysicalField& grad_x, int terms) {
  require_matrix_field(grad_x, "invert_jacobian");
  if (terms < 0) throw ConfigError("invert_jacobian: terms must be >= 0");
  const int nd = grad_x.grid().ndim();
  const std::size_t n = grad_x.points();
  JacobianInverse out{PhysicalField(grad_x.grid(), nd * nd)};
  std::vector<Mat> e(n);
  for (std::size_t p = 0; p < n; ++p) {
    double g[9];
    for (int k = 0; k < nd * nd; ++k) g[k] = grad_x.component(k)[p];
    e[p] = detail::load(g, nd, 1.0) - Mat::Identity();
    out.e_max = std::max(out.e_max, e[p].norm());
  }
  if (out.e_max > 0.5)
    throw CertifiedRegionError("invert_jacobian: ||grad X - Id||_inf = " + std::to_string(out.e_max) +
                                   " exceeds 1/2; the Neumann series is not certified",
                               out.e_max);
  for (std::size_t p = 0; p < n; ++p) {
    // Horner form of sum_{k<=terms} (-E)^k
    Mat s = Mat::Identity();
    for (int k = 0; k < terms; ++k) s = Mat::Identity() - e[p] * s;
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) out.a.component(i * nd + j)[p] = s(i, j);
    const double en = e[p].norm();
    if (en > 0.0)
      out.bound_ratio = std::max(out.bound_ratio, (s - Mat::Identity()).norm() / (2.0 * en));
  }
  out.tail_bound = 2.0 * std::pow(out.e_max, terms + 1);
  if (out.bound_ratio > 1.0 + 1e-12)
    throw NumericalError("invert_jacobian: ||A - Id|| exceeded 2 ||grad X - Id|| (ratio " +
                         std::to_string(out.bound_ratio) + ")");
  return out;
}

PhysicalField pull_back(const PhysicalField& f, const FlowMapState& flow) {
  const Grid& labels = flow.displacement.grid();
  const int nd = labels.ndim();
  if (f.grid().ndim() != nd) throw ConfigError("pull_back: field and labels differ in dimension");
  const CubicInterpolator ip(f.grid());
  const auto spans = component_spans(f.data(), f.points(), f.ncomp());
  PhysicalField out(labels, f.ncomp());
  std::vector<double> val(f.ncomp());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    std::size_t r = p;
    double x[3] = {0, 0, 0};
    for (int a = nd - 1; a >= 0; --a) {
      x[a] = labels.coord(a, static_cast<int>(r % labels.dim(a))) + flow.displacement.component(a)[p];
      r /= labels.dim(a);
    }
    ip.eval(spans, x, val.data());
    for (int c = 0; c < f.ncomp(); ++c) out.component(c)[p] = val[c];
  }
  return out;
}

}  // namespace nssl

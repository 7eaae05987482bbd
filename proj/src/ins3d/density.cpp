#include <algorithm>
#include <cmath>
#include <string>

#include "nssl/error.hpp"
#include "nssl/ins3d.hpp"
#include "nssl/interp.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

namespace {

// -v . grad h
PhysicalField transport_rate(const PhysicalField& h, const PhysicalField& v) {
  const Grid& g = h.grid();
  const PhysicalField gh = inverse(gradient(forward(h)));
  PhysicalField out(g, 1);
  auto o = out.component(0);
  for (int a = 0; a < g.ndim(); ++a) {
    auto d = gh.component(a);
    auto va = v.component(a);
    for (std::size_t p = 0; p < o.size(); ++p) o[p] -= va[p] * d[p];
  }
  return out;
}

PhysicalField spectral_step(const PhysicalField& h, const PhysicalField& v, double dt) {
  PhysicalField h1 = h;
  {
    PhysicalField k = transport_rate(h, v);
    k *= dt;
    h1 += k;
  }
  PhysicalField h2 = transport_rate(h1, v);
  h2 *= dt;
  h2 += h1;
  for (std::size_t p = 0; p < h2.points(); ++p)
    h2.data()[p] = 0.75 * h.data()[p] + 0.25 * h2.data()[p];
  PhysicalField h3 = transport_rate(h2, v);
  h3 *= dt;
  h3 += h2;
  PhysicalField out = h;
  for (std::size_t p = 0; p < out.points(); ++p)
    out.data()[p] = h.data()[p] / 3.0 + 2.0 / 3.0 * h3.data()[p];
  return out;
}

}  // namespace

PhysicalField density_advect(const PhysicalField& h, const PhysicalField& v, double dt,
                             const DensityOptions& opt) {
  const Grid& g = h.grid();
  const int nd = g.ndim();
  if (h.ncomp() != 1 || v.ncomp() < nd || !(v.grid() == g))
    throw ConfigError("density_advect: expected a scalar and a velocity on one grid");

  double disp = 0.0;
  for (int a = 0; a < nd; ++a)
    for (double x : v.component(a)) disp = std::max(disp, std::abs(dt * x) / g.spacing(a));
  if (disp > opt.max_displacement)
    throw StabilityError("density_advect: back-trace of " + std::to_string(disp) +
                             " cells exceeds the limit " + std::to_string(opt.max_displacement),
                         disp);

  if (opt.scheme == DensityScheme::kSpectral) return spectral_step(h, v, dt);

  const CubicInterpolator interp(g);
  const auto vs = component_spans(v.data(), g.size(), nd);
  const auto hs = h.component(0);
  PhysicalField out(g, 1);
  auto o = out.component(0);
  std::array<int, 3> idx{0, 0, 0};
  std::array<double, 3> x{}, xm{}, vm{};
  for (std::size_t p = 0; p < g.size(); ++p) {
    // Row-major index decomposition, last axis fastest.
    std::size_t r = p;
    for (int a = nd - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(r % g.dim(a));
      r /= g.dim(a);
    }
    for (int a = 0; a < nd; ++a) {
      x[a] = g.coord(a, idx[a]);
      xm[a] = x[a] - 0.5 * dt * v.component(a)[p];
    }
    interp.eval(vs, xm.data(), vm.data());
    for (int a = 0; a < nd; ++a) xm[a] = x[a] - dt * vm[a];
    double val = interp.eval(hs, xm.data());
    if (opt.clip) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      std::array<int, 3> base{0, 0, 0};
      for (int a = 0; a < nd; ++a) base[a] = static_cast<int>(std::floor(xm[a] / g.spacing(a)));
      for (int corner = 0; corner < (1 << nd); ++corner) {
        std::size_t q = 0;
        for (int a = 0; a < nd; ++a) {
          const int n = g.dim(a);
          const int i = ((base[a] + ((corner >> a) & 1)) % n + n) % n;
          q = q * n + i;
        }
        lo = std::min(lo, hs[q]);
        hi = std::max(hi, hs[q]);
      }
      val = std::clamp(val, lo, hi);
    }
    o[p] = val;
  }
  return out;
}

}  // namespace nssl

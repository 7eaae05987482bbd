#include "nssl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nssl/error.hpp"

namespace nssl {

namespace {

constexpr cplx kI{0.0, 1.0};

int vector_dims(const Grid& g, int ncomp) { return std::min(ncomp, g.ndim()); }

}  // namespace

SpectralField derivative(const SpectralField& f, int axis) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.ndim()) throw ConfigError("derivative: axis out of range");
  SpectralField out(g, f.ncomp());
  const auto k = g.k(axis);
  for (int c = 0; c < f.ncomp(); ++c) {
    auto src = f.component(c);
    auto dst = out.component(c);
    for (std::size_t s = 0; s < src.size(); ++s) dst[s] = kI * k[s] * src[s];
  }
  return out;
}

SpectralField gradient(const SpectralField& scalar, int ncomp_out) {
  const Grid& g = scalar.grid();
  if (scalar.ncomp() != 1) throw ConfigError("gradient: expected a scalar field");
  if (ncomp_out < 0) ncomp_out = g.ndim();
  if (ncomp_out < g.ndim()) throw ConfigError("gradient: too few output components");
  SpectralField out(g, ncomp_out);
  auto src = scalar.component(0);
  for (int a = 0; a < g.ndim(); ++a) {
    const auto k = g.k(a);
    auto dst = out.component(a);
    for (std::size_t s = 0; s < src.size(); ++s) dst[s] = kI * k[s] * src[s];
  }
  return out;
}

SpectralField gradient_tensor(const SpectralField& v) {
  const Grid& g = v.grid();
  const int nd = g.ndim();
  SpectralField out(g, v.ncomp() * nd);
  for (int i = 0; i < v.ncomp(); ++i) {
    auto src = v.component(i);
    for (int j = 0; j < nd; ++j) {
      const auto k = g.k(j);
      auto dst = out.component(i * nd + j);
      for (std::size_t s = 0; s < src.size(); ++s) dst[s] = kI * k[s] * src[s];
    }
  }
  return out;
}

SpectralField divergence(const SpectralField& v) {
  const Grid& g = v.grid();
  SpectralField out(g, 1);
  auto dst = out.component(0);
  for (int j = 0; j < vector_dims(g, v.ncomp()); ++j) {
    const auto k = g.k(j);
    auto src = v.component(j);
    for (std::size_t s = 0; s < src.size(); ++s) dst[s] += kI * k[s] * src[s];
  }
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  SpectralField out = f;
  const auto k2 = f.grid().k_squared();
  for (int c = 0; c < f.ncomp(); ++c) {
    auto d = out.component(c);
    for (std::size_t s = 0; s < d.size(); ++s) d[s] *= -k2[s];
  }
  return out;
}

SpectralField gradient_part(const SpectralField& u) {
  const Grid& g = u.grid();
  const int nd = vector_dims(g, u.ncomp());
  if (!(u.ncomp() == g.ndim() || (g.ndim() == 2 && u.ncomp() == 3)))
    throw ConfigError("leray_project: need ncomp == ndim, or 3 components on a 2D grid");
  SpectralField out(g, u.ncomp());
  const std::size_t n = g.spectral_size();
  for (std::size_t s = 0; s < n; ++s) {
    double kk = 0.0;
    cplx kdotu = 0.0;
    for (int j = 0; j < nd; ++j) {
      const double kj = g.k(j)[s];
      kk += kj * kj;
      kdotu += kj * u.component(j)[s];
    }
    if (kk == 0.0) continue;
    for (int j = 0; j < nd; ++j) out.component(j)[s] = g.k(j)[s] * kdotu / kk;
  }
  return out;
}

SpectralField leray_project(const SpectralField& u) {
  SpectralField out = u;
  out -= gradient_part(u);
  return out;
}

SpectralField poisson_solve(const SpectralField& f, double mean_tol) {
  if (f.ncomp() != 1) throw ConfigError("poisson_solve: expected a scalar field");
  const Grid& g = f.grid();
  const double rms = std::sqrt(l2_norm_sq(f) / g.volume());
  const double m = std::abs(f.mean(0));
  if (m > mean_tol * rms && m > 0.0)
    throw InconsistentDataError("poisson_solve: right side has mean " + std::to_string(m) +
                                " (rms " + std::to_string(rms) + ")");
  SpectralField out(g, 1);
  const auto k2 = g.k_squared();
  auto src = f.component(0);
  auto dst = out.component(0);
  for (std::size_t s = 0; s < src.size(); ++s)
    if (k2[s] > 0.0) dst[s] = -src[s] / k2[s];
  return out;
}

SpectralField mollify(const SpectralField& f, double epsilon) {
  if (epsilon < 0.0) throw ConfigError("mollify: epsilon must be >= 0");
  if (epsilon == 0.0) return f;
  SpectralField out = f;
  const auto k2 = f.grid().k_squared();
  const double e2 = 0.5 * epsilon * epsilon;
  for (int c = 0; c < f.ncomp(); ++c) {
    auto d = out.component(c);
    for (std::size_t s = 0; s < d.size(); ++s) d[s] *= std::exp(-e2 * k2[s]);
  }
  return out;
}

SpectralField heat_flow(const SpectralField& f, double t) {
  SpectralField out = f;
  const auto k2 = f.grid().k_squared();
  for (int c = 0; c < f.ncomp(); ++c) {
    auto d = out.component(c);
    for (std::size_t s = 0; s < d.size(); ++s) d[s] *= std::exp(-t * k2[s]);
  }
  return out;
}

void dealias_inplace(SpectralField& f) {
  const auto mask = f.grid().dealias_mask();
  for (int c = 0; c < f.ncomp(); ++c) {
    auto d = f.component(c);
    for (std::size_t s = 0; s < d.size(); ++s)
      if (!mask[s]) d[s] = 0.0;
  }
}

SpectralField dealias(SpectralField f) {
  dealias_inplace(f);
  return f;
}

SpectralField vorticity2d(const SpectralField& v) {
  if (v.ncomp() < 2) throw ConfigError("vorticity2d: need at least two components");
  const Grid& g = v.grid();
  SpectralField out(g, 1);
  const auto k0 = g.k(0);
  const auto k1 = g.k(1);
  auto v0 = v.component(0);
  auto v1 = v.component(1);
  auto dst = out.component(0);
  for (std::size_t s = 0; s < dst.size(); ++s) dst[s] = kI * (k0[s] * v1[s] - k1[s] * v0[s]);
  return out;
}

SpectralField extend_to_3d(const SpectralField& f2d, const Grid& g3) {
  const Grid& g2 = f2d.grid();
  if (g2.ndim() != 2 || g3.ndim() != 3 || g2.dim(0) != g3.dim(0) || g2.dim(1) != g3.dim(1) ||
      g2.length(0) != g3.length(0) || g2.length(1) != g3.length(1))
    throw ConfigError("extend_to_3d: horizontal grid shapes differ");
  SpectralField out(g3, f2d.ncomp());
  const int n0 = g3.dim(0), n1 = g3.dim(1), h2 = g3.spectral_dim(2);
  for (int c = 0; c < f2d.ncomp(); ++c) {
    auto dst = out.component(c);
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n1; ++j) {
        const int m[2] = {i, j};
        dst[(static_cast<std::size_t>(i) * n1 + j) * h2] = f2d.coeff(c, m);
      }
  }
  return out;
}

PhysicalField extend_to_3d(const PhysicalField& f2d, const Grid& g3) {
  const Grid& g2 = f2d.grid();
  if (g2.ndim() != 2 || g3.ndim() != 3 || g2.dim(0) != g3.dim(0) || g2.dim(1) != g3.dim(1))
    throw ConfigError("extend_to_3d: horizontal grid shapes differ");
  PhysicalField out(g3, f2d.ncomp());
  const std::size_t nh = g2.size();
  const int n2 = g3.dim(2);
  for (int c = 0; c < f2d.ncomp(); ++c) {
    auto src = f2d.component(c);
    auto dst = out.component(c);
    for (std::size_t p = 0; p < nh; ++p)
      std::fill_n(dst.begin() + static_cast<std::ptrdiff_t>(p * n2), n2, src[p]);
  }
  return out;
}

double gradient_l2_norm_sq(const SpectralField& f, int order) {
  const Grid& g = f.grid();
  const auto k2 = g.k_squared();
  const auto w = g.parseval_weight();
  double total = 0.0;
  for (int c = 0; c < f.ncomp(); ++c) {
    auto d = f.component(c);
    double sum = 0.0;
    for (std::size_t s = 0; s < d.size(); ++s) {
      double fac = w[s];
      for (int o = 0; o < order; ++o) fac *= k2[s];
      sum += fac * std::norm(d[s]);
    }
    total += sum;
  }
  return g.volume() * total;
}

double l2_norm_sq(const SpectralField& f) { return gradient_l2_norm_sq(f, 0); }

double max_divergence(const SpectralField& v) {
  const PhysicalField d = inverse(divergence(v));
  double m = 0.0;
  for (double x : d.data()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace nssl

#include <cmath>
#include <map>
#include <random>

#include "nssl/error.hpp"
#include "nssl/estimates.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

double lp_norm(const PhysicalField& f, double p) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be >= 1");
  const std::size_t n = f.points();
  const int nc = f.ncomp();
  const bool inf = std::isinf(p);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (int c = 0; c < nc; ++c) {
      const double x = f.component(c)[i];
      m2 += x * x;
    }
    if (inf)
      acc = std::max(acc, m2);
    else if (p == 2.0)
      acc += m2;
    else
      acc += std::pow(m2, 0.5 * p);
  }
  if (inf) return std::sqrt(acc);
  return std::pow(acc * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm(const SpectralField& f, double p) { return lp_norm(inverse(f), p); }

double gradient_lp_norm(const SpectralField& f, int order, double p) {
  SpectralField g = f;
  for (int o = 0; o < order; ++o) g = gradient_tensor(g);
  return lp_norm(g, p);
}

double sobolev_norm(const SpectralField& f, int order, double p) {
  double s = 0.0;
  SpectralField g = f;
  for (int o = 0; o <= order; ++o) {
    if (o > 0) g = gradient_tensor(g);
    s += lp_norm(g, p);
  }
  return s;
}

double besov_norm(const SpectralField& f, double s, double p) {
  if (!(p > 1.0) || std::isinf(p)) throw ConfigError("besov_norm: p must lie in (1, inf)");
  if (std::abs(s) > 4.0) throw ConfigError("besov_norm: |s| must be <= 4");
  const Grid& g = f.grid();
  const auto k2 = g.k_squared();
  const std::size_t ns = g.spectral_size();
  std::vector<int> shell(ns);
  int jmin = 1 << 30, jmax = -(1 << 30);
  for (std::size_t q = 0; q < ns; ++q) {
    if (k2[q] == 0.0) {
      shell[q] = std::numeric_limits<int>::min();
      continue;
    }
    shell[q] = static_cast<int>(std::floor(0.5 * std::log2(k2[q])));
    jmin = std::min(jmin, shell[q]);
    jmax = std::max(jmax, shell[q]);
  }
  double total = 0.0;
  for (int j = jmin; j <= jmax; ++j) {
    SpectralField part(g, f.ncomp());
    bool any = false;
    for (int c = 0; c < f.ncomp(); ++c) {
      auto src = f.component(c);
      auto dst = part.component(c);
      for (std::size_t q = 0; q < ns; ++q)
        if (shell[q] == j && src[q] != cplx(0.0)) {
          dst[q] = src[q];
          any = true;
        }
    }
    if (!any) continue;
    total += std::pow(2.0, j * s * p) * std::pow(lp_norm(part, p), p);
  }
  return std::pow(total, 1.0 / p);
}

double time_norm(const std::vector<double>& t, const std::vector<double>& g, double r) {
  if (t.size() != g.size()) throw ConfigError("time_norm: size mismatch");
  if (t.empty()) return 0.0;
  if (std::isinf(r)) {
    double m = 0.0;
    for (double x : g) m = std::max(m, std::abs(x));
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    acc += 0.5 * (t[i] - t[i - 1]) * (std::pow(std::abs(g[i - 1]), r) + std::pow(std::abs(g[i]), r));
  return std::pow(acc, 1.0 / r);
}

double sumspace_norm(const std::vector<double>& t, const std::vector<SpectralField>& a,
                     const std::vector<SpectralField>& b, double p) {
  double out = 0.0;
  if (!a.empty()) {
    const double n = a.front().grid().ndim();
    if (!(2.0 * p > n)) throw ConfigError("sumspace_norm: need 2p > n");
    const double r = 2.0 * p / (2.0 * p - n);
    const double q = 2.0 * p / (p + 2.0);
    std::vector<double> s;
    for (const auto& f : a) s.push_back(lp_norm(f, q));
    out += time_norm(t, s, r);
  }
  if (!b.empty()) {
    std::vector<double> s;
    for (const auto& f : b) s.push_back(std::sqrt(l2_norm_sq(f)));
    out += time_norm(t, s, 2.0);
  }
  return out;
}

double interpolation_constant(const Grid& g, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  const auto k2 = g.k_squared();
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    SpectralField f(g, 1);
    const double kc = 1.0 + 3.0 * i / std::max(1, samples - 1);
    auto c = f.component(0);
    for (std::size_t q = 1; q < c.size(); ++q)
      c[q] = cplx(N(rng), N(rng)) * std::exp(-k2[q] / (kc * kc));
    PhysicalField u = inverse(f);
    f = forward(u);  // restore Hermitian consistency of the self-conjugate planes
    const double l2 = std::sqrt(l2_norm_sq(f));
    const double gr = std::sqrt(gradient_l2_norm_sq(f, 1));
    double r;
    if (g.ndim() == 2)
      r = std::pow(lp_norm(u, 4.0), 2) / (l2 * gr);
    else
      r = lp_norm(u, 3.0) / std::sqrt(l2 * gr);
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace nssl

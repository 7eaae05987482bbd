#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "internal.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

namespace {

const std::map<std::string, std::set<std::string>>& accepted_params() {
  static const std::map<std::string, std::set<std::string>> p{
      {"zero", {}},
      {"taylor-green", {"U1", "U2", "c3"}},
      {"gaussian-bump", {"sigma"}},
      {"random-band", {"kmin", "kmax", "divfree"}},
      {"patch-ball", {"r", "eps", "cx", "cy", "cz"}},
      {"algebraic-vortex", {"a", "R"}},
  };
  return p;
}

double param(const GeneratorSpec& s, const std::string& k, double def) {
  auto it = s.params.find(k);
  return it == s.params.end() ? def : it->second;
}

double max_magnitude(const PhysicalField& f) {
  double m = 0.0;
  for (std::size_t p = 0; p < f.points(); ++p) {
    double s = 0.0;
    for (int c = 0; c < f.ncomp(); ++c) s += f.component(c)[p] * f.component(c)[p];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

PhysicalField scaled_to(PhysicalField f, double amp) {
  const double m = max_magnitude(f);
  if (m > 0.0) f *= amp / m;
  return f;
}

bool is_velocity(const Grid& g, int ncomp) { return ncomp == 3 || ncomp == g.ndim(); }

PhysicalField project(const PhysicalField& f) { return inverse(leray_project(forward(f))); }

PhysicalField taylor_green(const GeneratorSpec& s, const Grid& g, int ncomp) {
  const double A = s.amplitude, U1 = param(s, "U1", 0.0), U2 = param(s, "U2", 0.0),
               c3 = param(s, "c3", 0.0);
  std::vector<double> k;
  for (int a = 0; a < g.ndim(); ++a) k.push_back(kTwoPi / g.length(a));
  if (ncomp == 1)
    return sample(g, 1, [&](const double* x, double* o) {
      o[0] = A * std::cos(k[0] * x[0]) * std::cos(k[1] * x[1]);
    });
  if (g.ndim() == 2) {
    if (k[0] != k[1]) throw ConfigError("taylor-green: requires a square box");
    return sample(g, ncomp, [&](const double* x, double* o) {
      const double c0 = std::cos(k[0] * x[0]), s0 = std::sin(k[0] * x[0]);
      const double c1 = std::cos(k[1] * x[1]), s1 = std::sin(k[1] * x[1]);
      o[0] = U1 - A * c0 * s1;
      o[1] = U2 + A * s0 * c1;
      if (ncomp == 3) o[2] = c3 * A * c0 * c1;
    });
  }
  if (k[0] != k[1] || k[1] != k[2]) throw ConfigError("taylor-green: requires a cubic box");
  return sample(g, ncomp, [&](const double* x, double* o) {
    const double c0 = std::cos(k[0] * x[0]), s0 = std::sin(k[0] * x[0]);
    const double c1 = std::cos(k[1] * x[1]), s1 = std::sin(k[1] * x[1]);
    const double c2 = std::cos(k[2] * x[2]);
    o[0] = A * s0 * c1 * c2;
    o[1] = -A * c0 * s1 * c2;
    o[2] = 0.0;
  });
}

PhysicalField gaussian_bump(const GeneratorSpec& s, const Grid& g, int ncomp) {
  const double sigma = param(s, "sigma", g.length(0) / 16.0);
  if (!(sigma > 0.0)) throw ConfigError("gaussian-bump: sigma must be positive");
  const int nd = g.ndim();
  PhysicalField f = sample(g, ncomp, [&](const double* x, double* o) {
    double r2 = 0.0, d[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < nd; ++a) {
      d[a] = x[a] - 0.5 * g.length(a);
      r2 += d[a] * d[a];
    }
    const double psi = std::exp(-0.5 * r2 / (sigma * sigma));
    if (ncomp == 1) {
      o[0] = psi;
      return;
    }
    // perpendicular gradient of psi in the (x1, x2) plane
    o[0] = -d[1] / (sigma * sigma) * psi;
    o[1] = d[0] / (sigma * sigma) * psi;
    if (ncomp == 3) o[2] = nd == 2 ? psi : 0.0;
  });
  if (ncomp == 1) {
    f *= s.amplitude;
    return f;
  }
  return scaled_to(project(f), s.amplitude);
}

PhysicalField random_band(const GeneratorSpec& s, const Grid& g, int ncomp) {
  const double kmin = param(s, "kmin", 1.0), kmax = param(s, "kmax", 4.0);
  if (!(kmin >= 0.0 && kmax >= kmin)) throw ConfigError("random-band: need 0 <= kmin <= kmax");
  const bool divfree = param(s, "divfree", is_velocity(g, ncomp) && ncomp > 1 ? 1.0 : 0.0) != 0.0;
  // modes are drawn in a grid-independent order so refinements see one field
  const int K = static_cast<int>(std::floor(kmax));
  for (int a = 0; a < g.ndim(); ++a)
    if (2 * K >= g.dim(a)) throw ConfigError("random-band: kmax must stay below the Nyquist mode");
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> N(0.0, 1.0);
  SpectralField f(g, ncomp);
  std::vector<int> m(g.ndim(), -K);
  for (bool more = true; more;) {
    double m2 = 0.0;
    for (int x : m) m2 += static_cast<double>(x) * x;
    const double k = std::sqrt(m2);
    for (int c = 0; c < ncomp; ++c) {
      const double re = N(rng), im = N(rng);
      if (k < kmin || k > kmax || k == 0.0) continue;
      const auto [idx, conj] = g.spectral_index(m);
      f.component(c)[idx] = conj ? cplx(re, -im) : cplx(re, im);
    }
    more = false;
    for (int a = g.ndim() - 1; a >= 0; --a) {
      if (m[a] < K) {
        ++m[a];
        more = true;
        break;
      }
      m[a] = -K;
    }
  }
  // round trip enforces the Hermitian symmetry of the half spectrum
  f = forward(inverse(f));
  if (divfree) f = leray_project(f);
  return scaled_to(inverse(f), s.amplitude);
}

PhysicalField patch_ball(const GeneratorSpec& s, const Grid& g, int ncomp) {
  if (ncomp != 1) throw ConfigError("patch-ball: is a scalar (density) generator");
  const double r = param(s, "r", g.length(0) / 8.0);
  const double eps = param(s, "eps", g.min_spacing());
  const double c[3] = {param(s, "cx", 0.5 * g.length(0)), param(s, "cy", 0.5 * g.length(1)),
                       g.ndim() == 3 ? param(s, "cz", 0.5 * g.length(2)) : 0.0};
  if (!(r > 0.0) || eps < 0.0) throw ConfigError("patch-ball: need r > 0 and eps >= 0");
  PhysicalField ind = sample(g, 1, [&](const double* x, double* o) {
    double r2 = 0.0;
    for (int a = 0; a < g.ndim(); ++a) {
      // nearest periodic image
      double d = x[a] - c[a];
      d -= g.length(a) * std::round(d / g.length(a));
      r2 += d * d;
    }
    o[0] = r2 < r * r ? 1.0 : (r2 == r * r ? 0.5 : 0.0);
  });
  PhysicalField h = inverse(mollify(forward(ind), eps));
  h *= -s.amplitude;
  return h;
}

PhysicalField algebraic_vortex(const GeneratorSpec& s, const Grid& g, int ncomp) {
  if (g.ndim() != 2 || ncomp != 3) throw ConfigError("algebraic-vortex: 2D three-component only");
  const double L = g.length(0), dx = g.spacing(0);
  const double a = param(s, "a", 0.5 * dx), R = param(s, "R", L / 8.0), A = s.amplitude;
  if (!(a > 0.0 && R > 0.0)) throw ConfigError("algebraic-vortex: need a > 0 and R > 0");
  const double c0 = 0.5 * L + 0.5 * dx, c1 = 0.5 * g.length(1) + 0.5 * g.spacing(1);
  PhysicalField v = sample(g, 3, [&](const double* x, double* o) {
    const double rx = x[0] - c0, ry = x[1] - c1, r = std::hypot(rx, ry);
    const double chi = 0.5 * std::erfc((r - R) / (R / 8.0));
    const double vth = A * a * r / (r * r + a * a) * chi;
    o[0] = -vth * ry / r;
    o[1] = vth * rx / r;
    o[2] = A * a / std::sqrt(r * r + a * a) * chi;
  });
  return project(v);
}

}  // namespace

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> n = [] {
    std::vector<std::string> v;
    for (const auto& [k, p] : accepted_params()) v.push_back(k);
    return v;
  }();
  return n;
}

namespace detail {

void check_generator(const GeneratorSpec& spec) {
  auto it = accepted_params().find(spec.name);
  if (it == accepted_params().end()) throw ConfigError("unknown generator '" + spec.name + "'");
  for (const auto& [k, v] : spec.params)
    if (!it->second.count(k))
      throw ConfigError("generator '" + spec.name + "' has no parameter '" + k + "'");
}

}  // namespace detail

PhysicalField initial_data(const GeneratorSpec& spec, const Grid& grid, int ncomp, double h_gate) {
  detail::check_generator(spec);
  if (ncomp != 1 && ncomp != 3 && ncomp != grid.ndim())
    throw ConfigError("initial_data: ncomp must be 1, ndim or 3");
  if (!std::isfinite(spec.amplitude)) throw ConfigError("initial_data: amplitude must be finite");
  PhysicalField f(grid, ncomp);
  if (spec.name == "taylor-green")
    f = taylor_green(spec, grid, ncomp);
  else if (spec.name == "gaussian-bump")
    f = gaussian_bump(spec, grid, ncomp);
  else if (spec.name == "random-band")
    f = random_band(spec, grid, ncomp);
  else if (spec.name == "patch-ball")
    f = patch_ball(spec, grid, ncomp);
  else if (spec.name == "algebraic-vortex")
    f = algebraic_vortex(spec, grid, ncomp);
  if (ncomp == 1) {
    const double m = max_magnitude(f);
    if (m > h_gate)
      throw ConfigError(spec.name + ": sup |h0| = " + std::to_string(m) +
                        " violates the density smallness hypothesis sup |h0| <= " +
                        std::to_string(h_gate));
  }
  return f;
}

}  // namespace nssl

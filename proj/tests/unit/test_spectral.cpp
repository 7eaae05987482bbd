#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "nssl/error.hpp"
#include "nssl/interp.hpp"
#include "nssl/snapshot.hpp"
#include "nssl/spectral.hpp"
#include "nssl/stokes.hpp"

using namespace nssl;
using namespace nssl::testing;
using std::numbers::pi;

namespace {

// Sixth-order periodic central difference along `axis`.
std::vector<double> fd6(const Grid& g, std::span<const double> f, int axis) {
  std::vector<double> out(f.size());
  const double h = g.spacing(axis);
  const int nd = g.ndim();
  std::size_t stride = 1;
  for (int a = nd - 1; a > axis; --a) stride *= g.dim(a);
  const int n = g.dim(axis);
  for (std::size_t p = 0; p < f.size(); ++p) {
    const int i = static_cast<int>((p / stride) % n);
    auto at = [&](int off) {
      const int j = ((i + off) % n + n) % n;
      return f[p + (static_cast<std::ptrdiff_t>(j) - i) * static_cast<std::ptrdiff_t>(stride)];
    };
    out[p] = (45.0 * (at(1) - at(-1)) - 9.0 * (at(2) - at(-2)) + (at(3) - at(-3))) / (60.0 * h);
  }
  return out;
}

double fd_div_max(const SpectralField& u) {
  const PhysicalField p = inverse(u);
  const Grid& g = u.grid();
  std::vector<double> div(g.size(), 0.0);
  for (int a = 0; a < g.ndim(); ++a) {
    auto d = fd6(g, p.component(a), a);
    for (std::size_t i = 0; i < div.size(); ++i) div[i] += d[i];
  }
  return max_abs(div);
}

// Direct O(N^2) DFT derivative of a real 2D array, independent of FFTW.
std::vector<double> dft_derivative_2d(const Grid& g, std::span<const double> f, int axis) {
  const int n0 = g.dim(0), n1 = g.dim(1);
  std::vector<std::complex<double>> c(static_cast<std::size_t>(n0) * n1);
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b) {
      std::complex<double> s = 0.0;
      for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j)
          s += f[i * n1 + j] * std::polar(1.0, -2.0 * pi * (double(a) * i / n0 + double(b) * j / n1));
      c[a * n1 + b] = s / double(n0 * n1);
    }
  std::vector<double> out(f.size(), 0.0);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      std::complex<double> s = 0.0;
      for (int a = 0; a < n0; ++a)
        for (int b = 0; b < n1; ++b) {
          const int ma = a <= n0 / 2 ? a : a - n0;
          const int mb = b <= n1 / 2 ? b : b - n1;
          const int m = axis == 0 ? ma : mb;
          const int nn = axis == 0 ? n0 : n1;
          if (2 * std::abs(m) == nn) continue;
          const double k = 2.0 * pi * m / g.length(axis);
          s += std::complex<double>(0.0, k) * c[a * n1 + b] *
               std::polar(1.0, 2.0 * pi * (double(a) * i / n0 + double(b) * j / n1));
        }
      out[i * n1 + j] = s.real();
    }
  return out;
}

}  // namespace

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(Grid({6, 8}, {1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(Grid({9, 8}, {1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(Grid({8, 8, 8, 8}, {1, 1, 1, 1}), ConfigError);
  CHECK_THROWS_AS(Grid({8, 8}, {1.0, -1.0}), ConfigError);
}

TEST_CASE("wavenumbers and dealias mask") {
  Grid g({16, 12}, {2.0, 3.0});
  CHECK(g.wavenumber(0, 15) == doctest::Approx(2.0 * pi * -1 / 2.0));
  CHECK(g.wavenumber(1, 5) == doctest::Approx(2.0 * pi * 5 / 3.0));
  const auto mask = g.dealias_mask();
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const bool keep = std::abs(g.mode(0)[s]) <= 16 / 3.0 && std::abs(g.mode(1)[s]) <= 4;
    CHECK(bool(mask[s]) == keep);
  }
}

TEST_CASE("constant field has only the mean mode") {
  for (int nd : {2, 3}) {
    Grid g = Grid::cube(nd, 8);
    PhysicalField f(g, 1);
    for (auto& x : f.data()) x = 2.5;
    SpectralField s = forward(f);
    CHECK(s.mean(0).real() == doctest::Approx(2.5));
    for (std::size_t i = 1; i < s.modes(); ++i) CHECK(std::abs(s.data()[i]) < 1e-15);
  }
}

TEST_CASE("sin x1 maps to -+i/2 at m = +-1") {
  Grid g = Grid::cube(2, 16);
  SpectralField s = forward(sample(g, 1, [](const double* x, double* o) { o[0] = std::sin(x[0]); }));
  const int p[2] = {1, 0}, m[2] = {-1, 0};
  CHECK(std::abs(s.coeff(0, p) - cplx(0.0, -0.5)) < 1e-15);
  CHECK(std::abs(s.coeff(0, m) - cplx(0.0, 0.5)) < 1e-15);
  int nonzero = 0;
  for (const auto& c : s.data()) nonzero += std::abs(c) > 1e-14;
  CHECK(nonzero == 2);  // half-spectrum stores +1 and -1 on axis 0 separately
}

TEST_CASE("round trip and Hermitian symmetry") {
  for (auto dims : {std::vector<int>{8, 8}, {32, 16}, {64, 64}, {8, 8, 8}, {16, 24, 12}, {32, 32, 32}}) {
    Grid g(dims, std::vector<double>(dims.size(), 1.7));
    PhysicalField f = random_smooth(g, 3, 42);
    PhysicalField back = inverse(forward(f));
    CHECK(max_abs_diff(back.data(), f.data()) <= 1e-12 * max_abs(f.data()));
    // coefficients of the last-axis zero plane must satisfy c(-k) = conj c(k)
    SpectralField s = forward(f);
    for (std::size_t q = 0; q < s.modes(); ++q) {
      if (g.mode(g.ndim() - 1)[q] != 0) continue;
      std::vector<int> m(g.ndim()), mm(g.ndim());
      for (int a = 0; a < g.ndim(); ++a) m[a] = g.mode(a)[q], mm[a] = -m[a];
      CHECK(std::abs(s.coeff(1, m) - std::conj(s.coeff(1, mm))) < 1e-14);
    }
  }
  Grid g = Grid::cube(2, 8);
  std::vector<double> bad(10);
  CHECK_THROWS_AS(transform(g, 1, bad), ConfigError);
}

TEST_CASE("Leray projection") {
  Grid g = Grid::cube(2, 32);
  SUBCASE("gradients are annihilated") {
    SpectralField u = forward(sample(g, 2, [](const double* x, double* o) {
      o[0] = std::cos(x[0]);
      o[1] = 0.0;
    }));
    CHECK(max_abs(leray_project(u).data()) < 1e-15);
  }
  SUBCASE("divergence-free fields are unchanged") {
    SpectralField u = forward(sample(g, 2, [](const double* x, double* o) {
      o[0] = -std::sin(x[1]);
      o[1] = std::sin(x[0]);
    }));
    SpectralField pu = leray_project(u);
    pu -= u;
    CHECK(max_abs(pu.data()) < 1e-16);
  }
  SUBCASE("random field: spectral divergence, direct-DFT oracle and idempotence") {
    Grid small = Grid::cube(2, 16);
    SpectralField u = forward(random_smooth(small, 2, 7));
    SpectralField pu = leray_project(u);
    const double norm = std::sqrt(l2_norm_sq(u));
    CHECK(max_divergence(pu) <= 1e-12 * norm);
    PhysicalField pp = inverse(pu);
    auto d0 = dft_derivative_2d(small, pp.component(0), 0);
    auto d1 = dft_derivative_2d(small, pp.component(1), 1);
    for (std::size_t i = 0; i < d0.size(); ++i) d0[i] += d1[i];
    CHECK(max_abs(d0) <= 1e-12 * norm);
    SpectralField ppu = leray_project(pu);
    ppu -= pu;
    CHECK(max_abs(ppu.data()) <= 1e-13 * max_abs(pu.data()));
  }
  SUBCASE("finite-difference divergence converges to zero at sixth order") {
    auto make = [](int n) {
      Grid gg = Grid::cube(2, n);
      return leray_project(forward(random_smooth(gg, 2, 11, 3)));
    };
    const double e1 = fd_div_max(make(32)), e2 = fd_div_max(make(64));
    CHECK(e2 < e1 / 40.0);
  }
  SUBCASE("three components on a 2D grid project the horizontal part only") {
    SpectralField u = forward(random_smooth(g, 3, 3));
    SpectralField pu = leray_project(u);
    CHECK(max_divergence(pu) <= 1e-12 * std::sqrt(l2_norm_sq(u)));
    auto a = pu.component(2), b = u.component(2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
  SUBCASE("3D") {
    Grid g3 = Grid::cube(3, 16);
    SpectralField u = forward(random_smooth(g3, 3, 5));
    CHECK(max_divergence(leray_project(u)) <= 1e-12 * std::sqrt(l2_norm_sq(u)));
  }
}

TEST_CASE("Poisson solve") {
  Grid g = Grid::cube(2, 32);
  SUBCASE("zero") { CHECK(max_abs(poisson_solve(SpectralField(g, 1)).data()) == 0.0); }
  SUBCASE("closed-form eigenfunction") {
    SpectralField f = forward(sample(g, 1, [](const double* x, double* o) {
      o[0] = -2.0 * std::sin(x[0]) * std::sin(x[1]);
    }));
    PhysicalField u = inverse(poisson_solve(f));
    PhysicalField ref = sample(g, 1, [](const double* x, double* o) { o[0] = std::sin(x[0]) * std::sin(x[1]); });
    CHECK(max_abs_diff(u.data(), ref.data()) < 1e-14);
  }
  SUBCASE("residual on a random zero-mean field") {
    SpectralField f = forward(random_smooth(g, 1, 9));
    f.component(0)[0] = 0.0;
    SpectralField r = laplacian(poisson_solve(f));
    r -= f;
    CHECK(std::sqrt(l2_norm_sq(r)) <= 1e-12 * std::sqrt(l2_norm_sq(f)));
    CHECK(poisson_solve(f).mean(0) == cplx(0.0, 0.0));
  }
  SUBCASE("nonzero mean is inconsistent") {
    SpectralField f = forward(random_smooth(g, 1, 9));
    f.component(0)[0] = 0.1;
    CHECK_THROWS_AS(poisson_solve(f), InconsistentDataError);
  }
}

TEST_CASE("mollifier") {
  Grid g = Grid::cube(2, 64);
  SpectralField f = forward(random_smooth(g, 1, 1));
  SpectralField same = mollify(f, 0.0);
  same -= f;
  CHECK(max_abs(same.data()) == 0.0);
  CHECK(mollify(f, 0.3).mean(0) == f.mean(0));

  const int m[2] = {3, -2};
  SpectralField single(g, 1);
  single.component(0)[g.spectral_index(m).first] = 1.0;
  const double eps = 0.2;
  CHECK(std::abs(mollify(single, eps).coeff(0, m)) ==
        doctest::Approx(std::exp(-eps * eps * 13.0 / 2.0)).epsilon(1e-14));

  // Smoothed indicator: doubling epsilon cannot raise the maximum.
  SpectralField patch = forward(sample(g, 1, [](const double* x, double* o) {
    o[0] = std::hypot(x[0] - pi, x[1] - pi) < 1.0 ? 1.0 : 0.0;
  }));
  double prev = max_abs(inverse(mollify(patch, 0.1)).data());
  for (double e : {0.2, 0.4, 0.8}) {
    const double cur = max_abs(inverse(mollify(patch, e)).data());
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
  CHECK_THROWS_AS(mollify(f, -1.0), ConfigError);
}

TEST_CASE("phi functions") {
  for (double z : {-1e-8, -0.05, -0.099, -0.101, -2.0, -50.0}) {
    const long double zl = z;
    const long double p1 = std::expm1(zl) / zl;
    const long double p2 = (std::expm1(zl) - zl) / (zl * zl);
    CHECK(phi1(z) == doctest::Approx(double(p1)).epsilon(1e-13));
    if (std::abs(z) > 1e-3) CHECK(phi2(z) == doctest::Approx(double(p2)).epsilon(1e-12));
  }
  CHECK(phi1(0.0) == 1.0);
  CHECK(phi2(0.0) == 0.5);
}

TEST_CASE("Stokes propagator") {
  Grid g = Grid::cube(3, 16);
  const int m[3] = {1, 2, 0};
  const double k2 = 5.0;
  // Divergence-free single mode: u = (-2 sin(x+2y), sin(x+2y), 0).
  auto mode = [](const double* x, double* o) {
    const double s = std::sin(x[0] + 2.0 * x[1]);
    o[0] = -2.0 * s;
    o[1] = s;
    o[2] = 0.0;
  };
  SpectralField u0 = forward(sample(g, 3, mode));

  SUBCASE("free decay is the exact per-mode exponential") {
    auto traj = stokes_solve(u0, {}, 0.01, 50);
    const double t = traj.steps.back().t;
    CHECK(std::abs(traj.steps.back().u.coeff(0, m) - std::exp(-k2 * t) * u0.coeff(0, m)) < 1e-15);
    double gq = 0.0;
    for (const auto& s : traj.steps) gq = std::max(gq, max_abs(s.gradQ.data()));
    CHECK(gq == 0.0);
  }
  SUBCASE("steady divergence-free forcing from rest") {
    auto traj = stokes_solve(SpectralField(g, 3), [&](double) { return u0; }, 0.02, 40);
    const double t = traj.steps.back().t;
    const cplx expect = (1.0 - std::exp(-k2 * t)) / k2 * u0.coeff(1, m);
    CHECK(std::abs(traj.steps.back().u.coeff(1, m) - expect) < 1e-15);
  }
  SUBCASE("energy identity with f = 0") {
    SpectralField r = forward(random_smooth(g, 3, 21));
    auto traj = stokes_solve(r, {}, 0.005, 200);
    const double e0 = l2_norm_sq(traj.steps.front().u);
    for (std::size_t n = 0; n < traj.steps.size(); ++n) {
      const double lhs = l2_norm_sq(traj.steps[n].u) + traj.dissipation[n];
      CHECK(std::abs(lhs - e0) <= 1e-10 * e0);
    }
  }
  SUBCASE("momentum balance and divergence with gradient forcing") {
    auto force = [&](double t) {
      return forward(sample(g, 3, [t](const double* x, double* o) {
        o[0] = std::cos(t) * std::cos(x[0]) + std::sin(x[1]);
        o[1] = std::sin(x[2]);
        o[2] = t * std::cos(x[2]);
      }));
    };
    auto traj = stokes_solve(u0, force, 0.01, 20);
    for (const auto& s : traj.steps) {
      SpectralField res = s.u_t;
      res += s.gradQ;
      res -= laplacian(s.u);
      res -= force(s.t);
      CHECK(max_abs(res.data()) < 1e-14);
      CHECK(max_divergence(s.u) < 1e-13);
    }
  }
  SUBCASE("non-finite data is reported with the step") {
    SpectralField bad = u0;
    bad.component(0)[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(stokes_solve(bad, {}, 0.01, 3), NumericalError);
  }
}

TEST_CASE("snapshot round trip") {
  Grid g({8, 12, 10}, {1.0, 2.0, 3.0});
  PhysicalField f = random_smooth(g, 3, 4);
  const auto path = (std::filesystem::temp_directory_path() / "nssl_snap_test.bin").string();
  write_snapshot(path, f);
  auto h = read_snapshot_header(path);
  CHECK(h.ncomp == 3);
  CHECK(h.dims == std::vector<int>{8, 12, 10});
  PhysicalField back = read_snapshot(path);
  CHECK(back.grid().lengths() == g.lengths());
  CHECK(max_abs_diff(back.data(), f.data()) == 0.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_snapshot(path), ConfigError);
}

TEST_CASE("cubic interpolation") {
  Grid g = Grid::cube(3, 16, 1.0);
  // Cubics are reproduced exactly away from the periodic seam.
  PhysicalField f = sample(g, 1, [](const double* x, double* o) {
    o[0] = x[0] * x[0] * x[0] - 2.0 * x[1] * x[2] + x[2] * x[2];
  });
  CubicInterpolator in(g);
  const double p[3] = {0.4321, 0.5123, 0.3777};
  CHECK(in.eval(f.component(0), p) ==
        doctest::Approx(p[0] * p[0] * p[0] - 2.0 * p[1] * p[2] + p[2] * p[2]).epsilon(1e-13));
  // Periodic wrap: node values are returned exactly at and beyond the seam.
  PhysicalField s = random_smooth(g, 1, 8);
  const double q[3] = {1.0 + 3.0 / 16.0, -2.0 / 16.0, 5.0 / 16.0};
  const int idx[3] = {3, 14, 5};
  CHECK(in.eval(s.component(0), q) == doctest::Approx(s.component(0)[g.linear_index(idx)]).epsilon(1e-13));
}

TEST_CASE("2D to 3D extension keeps the horizontal field") {
  Grid g2 = Grid::cube(2, 16), g3 = Grid::cube(3, 16);
  PhysicalField f2 = random_smooth(g2, 3, 12);
  PhysicalField a = inverse(extend_to_3d(forward(f2), g3));
  PhysicalField b = extend_to_3d(f2, g3);
  CHECK(max_abs_diff(a.data(), b.data()) < 1e-13);
}

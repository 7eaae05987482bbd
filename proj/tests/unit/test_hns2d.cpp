#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "nssl/error.hpp"
#include "nssl/hns2d.hpp"
#include "nssl/spectral.hpp"

using namespace nssl;
using namespace nssl::testing;

namespace {

// Galilean-shifted three-component Taylor-Green field; exact for the
// three-component 2D system with unit viscosity.
PhysicalField shifted_tg(const Grid& g, double t, double U1, double U2, double c3) {
  const double d = std::exp(-2.0 * t);
  return sample(g, 3, [=](const double* x, double* o) {
    const double y1 = x[0] - U1 * t, y2 = x[1] - U2 * t;
    o[0] = U1 - std::cos(y1) * std::sin(y2) * d;
    o[1] = U2 + std::sin(y1) * std::cos(y2) * d;
    o[2] = c3 * std::cos(y1) * std::cos(y2) * d;
  });
}

double run_error(const Grid& g, double dt, double T, double U1, double U2, double c3,
                 Hns2dScheme scheme = Hns2dScheme::kExpAB2) {
  Hns2dSolver s(forward(shifted_tg(g, 0.0, U1, U2, c3)), {dt, scheme, 0.5, true});
  const long n = std::lround(T / dt);
  for (long i = 0; i < n; ++i) s.step();
  PhysicalField exact = shifted_tg(g, T, U1, U2, c3);
  return max_abs_diff(inverse(s.v()).data(), exact.data());
}

}  // namespace

TEST_CASE("zero data stays zero") {
  Grid g = Grid::cube(2, 16);
  Hns2dSolver s(SpectralField(g, 3), {});
  for (int i = 0; i < 5; ++i) s.step();
  CHECK(max_abs(s.v().data()) == 0.0);
  CHECK_THROWS_AS(Hns2dSolver(SpectralField(g, 2), {}), ConfigError);
}

TEST_CASE("Taylor-Green is reproduced to round-off") {
  Grid g = Grid::cube(2, 64);
  CHECK(run_error(g, 1e-3, 1.0, 0.0, 0.0, 0.0) <= 1e-10);
  CHECK(run_error(g, 1e-3, 1.0, 0.0, 0.0, 0.7) <= 1e-10);
}

TEST_CASE("shifted Taylor-Green converges at second order") {
  Grid g = Grid::cube(2, 32);
  const double e1 = run_error(g, 4e-3, 0.5, 1.0, 0.5, 0.7);
  const double e2 = run_error(g, 2e-3, 0.5, 1.0, 0.5, 0.7);
  const double e3 = run_error(g, 1e-3, 0.5, 1.0, 0.5, 0.7);
  MESSAGE("errors ", e1, " ", e2, " ", e3);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("Lawson RK4 converges at fourth order") {
  Grid g = Grid::cube(2, 32);
  const double e1 = run_error(g, 2e-2, 0.4, 1.0, 0.5, 0.7, Hns2dScheme::kLawsonRK4);
  const double e2 = run_error(g, 1e-2, 0.4, 1.0, 0.5, 0.7, Hns2dScheme::kLawsonRK4);
  MESSAGE("errors ", e1, " ", e2);
  CHECK(std::log2(e1 / e2) >= 3.7);
}

TEST_CASE("v3 without horizontal flow is pure heat flow") {
  Grid g = Grid::cube(2, 32);
  PhysicalField r = random_smooth(g, 3, 17);
  for (int c = 0; c < 2; ++c)
    for (auto& x : r.component(c)) x = 0.0;
  SpectralField v0 = forward(r);
  Hns2dSolver s(v0, {0.01, Hns2dScheme::kExpAB2, 0.5, true});
  for (int i = 0; i < 50; ++i) s.step();
  SpectralField d = s.v();
  d -= heat_flow(v0, s.t());
  CHECK(max_abs(d.data()) < 1e-14);
}

TEST_CASE("pressure of Taylor-Green") {
  Grid g = Grid::cube(2, 32);
  Hns2dSolver s(forward(shifted_tg(g, 0.0, 0.0, 0.0, 0.0)), {});
  PhysicalField p = inverse(s.pressure(s.v()));
  PhysicalField ref = sample(g, 1, [](const double* x, double* o) {
    o[0] = -0.25 * (std::cos(2.0 * x[0]) + std::cos(2.0 * x[1]));
  });
  CHECK(max_abs_diff(p.data(), ref.data()) < 1e-14);
  CHECK(std::abs(s.pressure(s.v()).mean(0)) == 0.0);
}

TEST_CASE("CFL violation is a stability error") {
  Grid g = Grid::cube(2, 32);
  Hns2dSolver s(forward(shifted_tg(g, 0.0, 20.0, 0.0, 0.0)), {0.01, Hns2dScheme::kExpAB2, 0.5, true});
  CHECK_THROWS_AS(s.step(), StabilityError);
}

TEST_CASE("Simpson quadrature") {
  std::vector<double> g;
  for (int n : {1, 2, 3, 4, 5, 8, 9}) {
    g.clear();
    const double h = 1.0 / n;
    for (int i = 0; i <= n; ++i) g.push_back(std::pow(i * h, n == 1 ? 1 : 3));
    CHECK(simpson(g, h) == doctest::Approx(n == 1 ? 0.5 : 0.25).epsilon(1e-14));
  }
}

TEST_CASE("energy, vorticity and maximum-principle monitors on random data") {
  Grid g = Grid::cube(2, 48);
  PhysicalField r = random_smooth(g, 3, 99, 4);
  SpectralField v0 = leray_project(forward(r));
  Hns2dRecordOptions rec;
  rec.T = 1.0;
  rec.cadence = 10;
  Hns2dRun run = hns2d_solve(v0, {2e-3, Hns2dScheme::kLawsonRK4, 0.5, true}, rec);
  const auto ledger = run.series.values("energy_ledger");
  for (double x : ledger) CHECK(x <= run.initial_energy * (1.0 + 1e-6));
  CHECK(ledger.back() >= run.initial_energy * (1.0 - 1e-6));
  for (const char* name : {"vorticity:Lp:2", "vorticity:Lp:4", "vorticity:Lp:6", "v3:Linf"}) {
    const auto v = run.series.values(name);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1] * (1.0 + 1e-3));
  }
  for (double d : run.mean_drift) CHECK(d <= 1e-13);
  for (double c : run.series.values("cz_ratio:Lp:4")) CHECK(c > 0.5);
  CHECK(bounded_series(run.series.values("weighted:int_t:dtv_sq"), true, 0.1));

  // The exponential AB2 scheme only dissipates: the ledger stays below.
  Hns2dRun ab2 = hns2d_solve(v0, {2e-3, Hns2dScheme::kExpAB2, 0.5, true}, rec);
  for (double x : ab2.series.values("energy_ledger")) CHECK(x <= ab2.initial_energy);
}

TEST_CASE("weighted monitor peak for single-mode decay") {
  // v = (sin 2 x2, 0, 0) decays as e^{-4t}; t^2 ||v_t||^2 peaks at t = 1/4.
  Grid g = Grid::cube(2, 16);
  SpectralField v0 = forward(sample(g, 3, [](const double* x, double* o) {
    o[0] = std::sin(2.0 * x[1]);
    o[1] = o[2] = 0.0;
  }));
  Hns2dRecordOptions rec;
  rec.T = 1.0;
  Hns2dRun run = hns2d_solve(v0, {1e-3, Hns2dScheme::kExpAB2, 0.5, true}, rec);
  const auto t = run.series.times("weighted:t^2:dtv_sq");
  const auto v = run.series.values("weighted:t^2:dtv_sq");
  const auto it = std::max_element(v.begin(), v.end());
  CHECK(std::abs(t[it - v.begin()] - 0.25) <= 0.05 * 0.25);
  const double e0 = l2_norm_sq(v0);
  CHECK(*it == doctest::Approx(0.0625 * 16.0 * std::exp(-2.0) * e0).epsilon(1e-6));
}

TEST_CASE("decay probe on scale-critical data at small size") {
  // Smoke-level version of the acceptance probe on a smaller box.
  const int N = 256;
  Grid g = Grid::cube(2, N, N);
  const double R = N / 8.0, a = 0.5, A = 1e-3, c = N / 2.0 + 0.5;
  SpectralField v0 = forward(sample(g, 3, [&](const double* x, double* o) {
    const double rx = x[0] - c, ry = x[1] - c, r = std::hypot(rx, ry);
    const double chi = 0.5 * std::erfc((r - R) / (R / 8.0));
    const double vth = A * a * r / (r * r + a * a) * chi;
    o[0] = -vth * ry / r;
    o[1] = vth * rx / r;
    o[2] = A * a / std::sqrt(r * r + a * a) * chi;
  }));
  DecayProbeResult res = hns2d_decay_probe(v0, {0.25, Hns2dScheme::kExpAB2, 0.5, true}, 4.0, R * R / 60.0, 16);
  CHECK_FALSE(res.contaminated);
  CHECK(std::abs(res.v_linf.slope - res.oracle_v_linf.slope) < 1e-3);
  CHECK(res.v_linf.slope < -0.35);
  CHECK(res.grad_v_linf.slope < -0.75);
  CHECK(res.dtv_linf.slope < -1.2);
}

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "nssl/error.hpp"
#include "nssl/estimates.hpp"
#include "nssl/spectral.hpp"

using namespace nssl;
using namespace nssl::testing;
using std::numbers::pi;

TEST_CASE("Lp norms") {
  Grid g({16, 32}, {2.0, 3.0});
  PhysicalField c(g, 1);
  for (auto& x : c.data()) x = -1.5;
  for (double p : {1.0, 2.0, 3.5, 6.0})
    CHECK(lp_norm(c, p) == doctest::Approx(1.5 * std::pow(6.0, 1.0 / p)).epsilon(1e-13));
  CHECK(lp_norm(c, kInf) == 1.5);

  Grid h = Grid::cube(2, 32);
  PhysicalField s = sample(h, 1, [](const double* x, double* o) { o[0] = std::sin(x[0]); });
  CHECK(lp_norm(s, 2.0) == doctest::Approx(pi * std::sqrt(2.0)).epsilon(1e-14));
  s.data()[77] = 3.0;
  CHECK(lp_norm(s, kInf) == 3.0);

  // Vector magnitude: (cos, sin) has unit length everywhere.
  PhysicalField v = sample(h, 2, [](const double* x, double* o) {
    o[0] = std::cos(x[0] + x[1]);
    o[1] = std::sin(x[0] + x[1]);
  });
  CHECK(lp_norm(v, kInf) == doctest::Approx(1.0));
  CHECK(lp_norm(v, 4.0) == doctest::Approx(std::pow(4.0 * pi * pi, 0.25)));
}

TEST_CASE("gradient and Sobolev norms of a single mode") {
  Grid g = Grid::cube(2, 32);
  SpectralField f = forward(sample(g, 1, [](const double* x, double* o) { o[0] = std::sin(3.0 * x[0] + 4.0 * x[1]); }));
  const double l2 = lp_norm(f, 2.0);
  CHECK(gradient_lp_norm(f, 1, 2.0) == doctest::Approx(5.0 * l2).epsilon(1e-13));
  CHECK(gradient_lp_norm(f, 2, 2.0) == doctest::Approx(25.0 * l2).epsilon(1e-13));
  CHECK(sobolev_norm(f, 2, 2.0) == doctest::Approx(31.0 * l2).epsilon(1e-13));
}

TEST_CASE("Besov norm") {
  Grid g = Grid::cube(2, 64);
  SUBCASE("zero") { CHECK(besov_norm(SpectralField(g, 1), 1.0, 2.0) == 0.0); }
  SUBCASE("single shell: value and homogeneity") {
    for (double s : {-1.0, 0.5, 1.5})
      for (double p : {1.5, 2.0, 4.0}) {
        PhysicalField m = sample(g, 1, [](const double* x, double* o) { o[0] = std::cos(4.0 * x[1]); });
        SpectralField f = forward(m);
        const double expect = std::pow(4.0, s) * lp_norm(m, p);
        CHECK(besov_norm(f, s, p) == doctest::Approx(expect).epsilon(1e-13));
        CHECK(besov_norm(2.5 * f, s, p) == doctest::Approx(2.5 * expect).epsilon(1e-13));
      }
  }
  SUBCASE("s = 0, p = 2 recombines to the mean-free L2 norm") {
    SpectralField f = forward(sample(g, 1, [](const double* x, double* o) {
      o[0] = 1.0 + std::exp(-((x[0] - pi) * (x[0] - pi) + (x[1] - pi) * (x[1] - pi)) / 0.5);
    }));
    SpectralField mf = f;
    mf.component(0)[0] = 0.0;
    const double l2 = std::sqrt(l2_norm_sq(mf));
    CHECK(std::abs(besov_norm(f, 0.0, 2.0) - l2) <= 0.05 * l2);
  }
  SUBCASE("ranges") {
    SpectralField f(g, 1);
    CHECK_THROWS_AS(besov_norm(f, 5.0, 2.0), ConfigError);
    CHECK_THROWS_AS(besov_norm(f, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(besov_norm(f, 0.0, kInf), ConfigError);
  }
}

TEST_CASE("sum-space norm") {
  Grid g = Grid::cube(3, 8);
  SpectralField a = forward(random_smooth(g, 3, 1, 2));
  SpectralField b = forward(random_smooth(g, 3, 2, 2));
  std::vector<double> t;
  for (int i = 0; i <= 10; ++i) t.push_back(0.3 * i);
  const double T = 3.0, p = 4.0;
  std::vector<SpectralField> as(t.size(), a), bs(t.size(), b);
  const double q = 2.0 * p / (p + 2.0);
  const double ea = std::pow(T, (2.0 * p - 3.0) / (2.0 * p)) * lp_norm(a, q);
  const double eb = std::sqrt(T) * std::sqrt(l2_norm_sq(b));
  CHECK(sumspace_norm(t, as, {}, p) == doctest::Approx(ea).epsilon(1e-12));
  CHECK(sumspace_norm(t, {}, bs, p) == doctest::Approx(eb).epsilon(1e-12));
  CHECK(sumspace_norm(t, as, bs, p) == doctest::Approx(ea + eb).epsilon(1e-12));
}

TEST_CASE("time norms") {
  std::vector<double> t, g;
  for (int i = 0; i <= 2000; ++i) t.push_back(i * 1e-3), g.push_back(std::exp(-t.back()));
  CHECK(time_norm(t, g, 2.0) == doctest::Approx(std::sqrt((1.0 - std::exp(-4.0)) / 2.0)).epsilon(1e-6));
  CHECK(time_norm(t, g, kInf) == 1.0);
}

TEST_CASE("norm series CSV") {
  NormSeries s;
  s.add(0.0, "L2", 1.0 / 3.0);
  s.add(0.0, "Linf", std::numbers::e);
  s.add(0.1, "L2", 1e-300);
  CHECK_THROWS_AS(s.add(0.1, "L2", 1.0), ConfigError);
  CHECK_THROWS_AS(s.add(0.2, "L2", std::nan("")), NumericalError);
  const auto path = (std::filesystem::temp_directory_path() / "nssl_series.csv").string();
  s.write_csv(path);
  NormSeries r = NormSeries::read_csv(path);
  CHECK(r.values("L2") == s.values("L2"));
  CHECK(r.values("Linf") == s.values("Linf"));
  std::filesystem::remove(path);
}

TEST_CASE("decay fits") {
  std::vector<double> t, v;
  for (int i = 0; i < 40; ++i) {
    t.push_back(std::pow(10.0, 0.05 * i));
    v.push_back(3.7 * std::pow(t.back(), -0.75));
  }
  DecayFit f = decay_fit(t, v, 1.0, 100.0);
  CHECK(std::abs(f.slope + 0.75) < 1e-10);
  CHECK(std::abs(std::exp(f.intercept) - 3.7) < 1e-9);
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(decay_fit(t, v, 1.0, 1.3), ConfigError);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 0.01);
  for (auto& x : v) x *= 1.0 + N(rng);
  f = decay_fit(t, v, 1.0, 100.0);
  CHECK(std::abs(f.slope + 0.75) < 0.05);
  CHECK(f.r2 >= 0.99);

  // Heat flow of an integrable bump in 2D: ||e^{t Lap} g||_inf ~ t^{-1}.
  Grid g = Grid::cube(2, 128, 40.0);
  SpectralField bump = forward(sample(g, 1, [](const double* x, double* o) {
    o[0] = std::exp(-((x[0] - 20.0) * (x[0] - 20.0) + (x[1] - 20.0) * (x[1] - 20.0)) / 2.0);
  }));
  std::vector<double> ht, hv;
  for (int i = 0; i < 16; ++i) {
    ht.push_back(5.0 * std::pow(2.0, i / 5.0));
    hv.push_back(lp_norm(heat_flow(bump, ht.back()), kInf));
  }
  f = decay_fit(ht, hv, 5.0, 40.0);
  CHECK(std::abs(f.slope + 1.0) < 0.1);
}

TEST_CASE("monitor report text") {
  MonitorReport r = bound_monitor("energy", "energy inequality", 1.0, 2.0);
  CHECK(r.verdict == Verdict::kPass);
  CHECK(r.format() == "monitor: energy\nanchor: energy inequality\nlhs: 1\nrhs: 2\nratio: 0.5\nverdict: pass\n");
  CHECK(bound_monitor("x", "y", 3.0, 2.0).verdict == Verdict::kFail);
  CHECK(report_only("x", "y", 3.0, 2.0).verdict == Verdict::kReportOnly);
  CHECK(report_only("x", "y", 0.0, 0.0).ratio == 0.0);
}

TEST_CASE("maximal-regularity ratio") {
  Grid g = Grid::cube(3, 16);
  SUBCASE("degenerate input") {
    auto traj = stokes_solve(SpectralField(g, 3), {}, 0.01, 4);
    CHECK_THROWS_AS(maxreg_ratio(traj, 4.0), InconsistentDataError);
  }
  SUBCASE("single-mode heat decay matches the closed form") {
    // u = (-sin(2y), 0, 0)... |k| = 2 lies on the shell boundary 2^1.
    SpectralField u0 = forward(sample(g, 3, [](const double* x, double* o) {
      o[0] = std::sin(2.0 * x[1]);
      o[1] = 0.0;
      o[2] = 0.0;
    }));
    const double p = 4.0, k2 = 4.0, T = 1.0, dt = 1e-3;
    auto traj = stokes_solve(u0, {}, dt, static_cast<int>(std::lround(T / dt)));
    const double ell = std::pow(2.0, 2.0 - 2.0 / p);
    const double expect = (ell + 2.0 * k2 * std::pow((1.0 - std::exp(-p * k2 * T)) / (p * k2), 1.0 / p)) / ell;
    CHECK(std::abs(maxreg_parts(traj, p).ratio() - expect) <= 0.02 * expect);
  }
}

TEST_CASE("bounded series") {
  std::vector<double> decay, grow, sat;
  for (int i = 0; i < 100; ++i) {
    const double t = 0.1 * i;
    decay.push_back(t * t * std::exp(-t));
    grow.push_back(t);
    sat.push_back(1.0 - std::exp(-t));
  }
  CHECK(bounded_series(decay, false));
  CHECK_FALSE(bounded_series(grow, false));
  CHECK(bounded_series(sat, true));
  CHECK_FALSE(bounded_series(grow, true));
}

TEST_CASE("interpolation constants are finite and order one") {
  const double c2 = interpolation_constant(Grid::cube(2, 32), 6, 3);
  const double c3 = interpolation_constant(Grid::cube(3, 16), 4, 3);
  CHECK(std::isfinite(c2));
  CHECK(c2 > 0.0);
  CHECK(c2 < 10.0);
  CHECK(c3 > 0.0);
  CHECK(c3 < 10.0);
}

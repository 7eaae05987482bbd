#pragma once

#include <cmath>
#include <random>

#include "nssl/field.hpp"

namespace nssl::testing {

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(std::span<const cplx> a) {
  double m = 0.0;
  for (const cplx& x : a) m = std::max(m, std::abs(x));
  return m;
}

/// Smooth random field: a handful of random low modes per component.
inline PhysicalField random_smooth(const Grid& g, int ncomp, unsigned seed, int kmax = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  struct Term {
    int c;
    std::array<int, 3> m;
    double a, ph;
  };
  std::vector<Term> terms;
  for (int c = 0; c < ncomp; ++c)
    for (int q = 0; q < 12; ++q) {
      Term t{c, {0, 0, 0}, U(rng), kTwoPi * U(rng)};
      for (int a = 0; a < g.ndim(); ++a) t.m[a] = static_cast<int>(std::lround(kmax * U(rng)));
      terms.push_back(t);
    }
  return sample(g, ncomp, [&](const double* x, double* out) {
    for (int c = 0; c < ncomp; ++c) out[c] = 0.0;
    for (const auto& t : terms) {
      double ph = t.ph;
      for (int a = 0; a < g.ndim(); ++a) ph += kTwoPi * t.m[a] * x[a] / g.length(a);
      out[t.c] += t.a * std::sin(ph);
    }
  });
}

}  // namespace nssl::testing

#include "nssl/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <string>

#include "nssl/error.hpp"

namespace nssl {

namespace {

// FFTW's planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Grid::Impl {
  std::vector<int> dims;
  std::vector<double> lengths;
  double dealias = 2.0 / 3.0;
  std::size_t n_phys = 1;
  std::size_t n_spec = 1;
  std::vector<int> spec_dims;

  std::array<std::vector<double>, 3> kd;
  std::array<std::vector<int>, 3> modes;
  std::vector<double> ksq;
  std::vector<double> weight;
  std::vector<unsigned char> mask;

  // Plans are built with FFTW_ESTIMATE so the algorithm choice, and hence
  // the floating-point result, does not depend on timing measurements.
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  std::mutex exec_mutex;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    fftw_free(rbuf);
    fftw_free(cbuf);
  }
};

Grid::Grid(std::vector<int> dims, std::vector<double> lengths, double dealias_fraction)
    : impl_(std::make_shared<Impl>()) {
  if (dims.size() < 2 || dims.size() > 3)
    throw ConfigError("grid: ndim must be 2 or 3, got " + std::to_string(dims.size()));
  if (lengths.size() != dims.size())
    throw ConfigError("grid: box_lengths must have one entry per axis");
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] < 8 || dims[a] % 2 != 0)
      throw ConfigError("grid: axis " + std::to_string(a) +
                        " needs an even mode count >= 8, got " + std::to_string(dims[a]));
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
      throw ConfigError("grid: box length on axis " + std::to_string(a) + " must be positive");
  }
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw ConfigError("grid: dealias_fraction must lie in (0,1]");

  auto& g = *impl_;
  g.dims = std::move(dims);
  g.lengths = std::move(lengths);
  g.dealias = dealias_fraction;
  const int nd = static_cast<int>(g.dims.size());
  g.spec_dims = g.dims;
  g.spec_dims.back() = g.dims.back() / 2 + 1;
  for (int a = 0; a < nd; ++a) {
    g.n_phys *= static_cast<std::size_t>(g.dims[a]);
    g.n_spec *= static_cast<std::size_t>(g.spec_dims[a]);
  }

  for (int a = 0; a < nd; ++a) {
    g.kd[a].resize(g.n_spec);
    g.modes[a].resize(g.n_spec);
  }
  g.ksq.resize(g.n_spec);
  g.weight.resize(g.n_spec);
  g.mask.resize(g.n_spec);

  std::array<int, 3> idx{0, 0, 0};
  for (std::size_t s = 0; s < g.n_spec; ++s) {
    std::size_t rem = s;
    for (int a = nd - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % g.spec_dims[a]);
      rem /= g.spec_dims[a];
    }
    double k2 = 0.0;
    bool keep = true;
    for (int a = 0; a < nd; ++a) {
      const int n = g.dims[a];
      const int m = idx[a] <= n / 2 ? idx[a] : idx[a] - n;
      const double k = kTwoPi * m / g.lengths[a];
      g.modes[a][s] = m;
      g.kd[a][s] = (m == n / 2) ? 0.0 : k;
      k2 += k * k;
      if (std::abs(m) > g.dealias * (n / 2) + 1e-12) keep = false;
    }
    g.ksq[s] = k2;
    g.mask[s] = keep ? 1 : 0;
    const int ml = idx[nd - 1];
    g.weight[s] = (ml == 0 || ml == g.dims[nd - 1] / 2) ? 1.0 : 2.0;
  }

  std::lock_guard lock(planner_mutex());
  g.rbuf = fftw_alloc_real(g.n_phys);
  g.cbuf = fftw_alloc_complex(g.n_spec);
  g.r2c = fftw_plan_dft_r2c(nd, g.dims.data(), g.rbuf, g.cbuf, FFTW_ESTIMATE);
  g.c2r = fftw_plan_dft_c2r(nd, g.dims.data(), g.cbuf, g.rbuf, FFTW_ESTIMATE);
  if (!g.r2c || !g.c2r) throw NumericalError("grid: FFTW plan creation failed");
}

Grid Grid::cube(int ndim, int n, double length, double dealias_fraction) {
  return Grid(std::vector<int>(ndim, n), std::vector<double>(ndim, length), dealias_fraction);
}

int Grid::ndim() const { return static_cast<int>(impl_->dims.size()); }
int Grid::dim(int axis) const { return impl_->dims[axis]; }
const std::vector<int>& Grid::dims() const { return impl_->dims; }
double Grid::length(int axis) const { return impl_->lengths[axis]; }
const std::vector<double>& Grid::lengths() const { return impl_->lengths; }
double Grid::spacing(int axis) const { return impl_->lengths[axis] / impl_->dims[axis]; }

double Grid::min_spacing() const {
  double h = spacing(0);
  for (int a = 1; a < ndim(); ++a) h = std::min(h, spacing(a));
  return h;
}

double Grid::volume() const {
  double v = 1.0;
  for (double l : impl_->lengths) v *= l;
  return v;
}

double Grid::cell_volume() const { return volume() / static_cast<double>(size()); }
double Grid::dealias_fraction() const { return impl_->dealias; }
std::size_t Grid::size() const { return impl_->n_phys; }
std::size_t Grid::spectral_size() const { return impl_->n_spec; }
int Grid::spectral_dim(int axis) const { return impl_->spec_dims[axis]; }

int Grid::signed_mode(int axis, int m) const {
  const int n = impl_->dims[axis];
  m = ((m % n) + n) % n;
  return m <= n / 2 ? m : m - n;
}

bool Grid::is_nyquist(int axis, int m) const {
  return signed_mode(axis, m) == impl_->dims[axis] / 2;
}

double Grid::wavenumber(int axis, int m) const {
  return kTwoPi * signed_mode(axis, m) / impl_->lengths[axis];
}

std::span<const double> Grid::k(int axis) const { return impl_->kd[axis]; }
std::span<const double> Grid::k_squared() const { return impl_->ksq; }
std::span<const int> Grid::mode(int axis) const { return impl_->modes[axis]; }
std::span<const double> Grid::parseval_weight() const { return impl_->weight; }
std::span<const unsigned char> Grid::dealias_mask() const { return impl_->mask; }

std::size_t Grid::linear_index(std::span<const int> idx) const {
  std::size_t s = 0;
  for (int a = 0; a < ndim(); ++a) {
    const int n = impl_->dims[a];
    s = s * n + static_cast<std::size_t>(((idx[a] % n) + n) % n);
  }
  return s;
}

std::pair<std::size_t, bool> Grid::spectral_index(std::span<const int> modes) const {
  const int nd = ndim();
  std::array<int, 3> m{0, 0, 0};
  for (int a = 0; a < nd; ++a) m[a] = signed_mode(a, modes[a]);
  bool conj = false;
  if (m[nd - 1] < 0) {
    for (int a = 0; a < nd; ++a) m[a] = signed_mode(a, -m[a]);
    conj = true;
  }
  // Last-axis index is now in [0, n/2].
  std::size_t s = 0;
  for (int a = 0; a < nd; ++a) {
    const int n = impl_->dims[a];
    const int i = (a == nd - 1) ? m[a] : ((m[a] % n) + n) % n;
    s = s * impl_->spec_dims[a] + static_cast<std::size_t>(i);
  }
  return {s, conj};
}

void Grid::forward(std::span<const double> in, std::span<cplx> out) const {
  auto& g = *impl_;
  if (in.size() != g.n_phys || out.size() != g.n_spec)
    throw ConfigError("transform: array shape does not match grid");
  std::lock_guard lock(g.exec_mutex);
  std::memcpy(g.rbuf, in.data(), g.n_phys * sizeof(double));
  fftw_execute(g.r2c);
  const double scale = 1.0 / static_cast<double>(g.n_phys);
  const auto* src = reinterpret_cast<const cplx*>(g.cbuf);
  for (std::size_t s = 0; s < g.n_spec; ++s) out[s] = src[s] * scale;
}

void Grid::inverse(std::span<const cplx> in, std::span<double> out) const {
  auto& g = *impl_;
  if (in.size() != g.n_spec || out.size() != g.n_phys)
    throw ConfigError("transform: array shape does not match grid");
  std::lock_guard lock(g.exec_mutex);
  std::memcpy(static_cast<void*>(g.cbuf), in.data(), g.n_spec * sizeof(cplx));
  fftw_execute(g.c2r);
  std::memcpy(out.data(), g.rbuf, g.n_phys * sizeof(double));
}

bool Grid::same_shape(const Grid& other) const {
  if (impl_ == other.impl_) return true;
  return impl_->dims == other.impl_->dims && impl_->lengths == other.impl_->lengths &&
         impl_->dealias == other.impl_->dealias;
}

}  // namespace nssl

#include "nssl/field.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "nssl/error.hpp"

namespace nssl {

namespace {

void require_same(const Grid& a, const Grid& b, int ca, int cb, const char* op) {
  if (!a.same_shape(b) || ca != cb)
    throw ConfigError(std::string(op) + ": field shapes differ");
}

}  // namespace

PhysicalField::PhysicalField(Grid grid, int ncomp)
    : grid_(std::move(grid)), ncomp_(ncomp), data_(grid_.size() * ncomp, 0.0) {
  if (ncomp < 1) throw ConfigError("field: ncomp must be >= 1");
}

PhysicalField::PhysicalField(Grid grid, int ncomp, std::vector<double> data)
    : grid_(std::move(grid)), ncomp_(ncomp), data_(std::move(data)) {
  if (ncomp < 1) throw ConfigError("field: ncomp must be >= 1");
  if (data_.size() != grid_.size() * static_cast<std::size_t>(ncomp))
    throw ConfigError("field: sample count " + std::to_string(data_.size()) +
                      " does not match grid (" + std::to_string(grid_.size()) + " x " +
                      std::to_string(ncomp) + ")");
}

std::span<double> PhysicalField::component(int c) {
  return std::span<double>(data_).subspan(grid_.size() * c, grid_.size());
}

std::span<const double> PhysicalField::component(int c) const {
  return std::span<const double>(data_).subspan(grid_.size() * c, grid_.size());
}

PhysicalField& PhysicalField::operator+=(const PhysicalField& o) {
  require_same(grid_, o.grid_, ncomp_, o.ncomp_, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

PhysicalField& PhysicalField::operator-=(const PhysicalField& o) {
  require_same(grid_, o.grid_, ncomp_, o.ncomp_, "subtract");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

PhysicalField& PhysicalField::operator*=(double s) {
  for (auto& x : data_) x *= s;
  return *this;
}

SpectralField::SpectralField(Grid grid, int ncomp)
    : grid_(std::move(grid)), ncomp_(ncomp), coeffs_(grid_.spectral_size() * ncomp) {
  if (ncomp < 1) throw ConfigError("field: ncomp must be >= 1");
}

SpectralField::SpectralField(Grid grid, int ncomp, std::vector<cplx> coeffs)
    : grid_(std::move(grid)), ncomp_(ncomp), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.spectral_size() * static_cast<std::size_t>(ncomp))
    throw ConfigError("field: coefficient count does not match grid");
}

std::span<cplx> SpectralField::component(int c) {
  return std::span<cplx>(coeffs_).subspan(grid_.spectral_size() * c, grid_.spectral_size());
}

std::span<const cplx> SpectralField::component(int c) const {
  return std::span<const cplx>(coeffs_).subspan(grid_.spectral_size() * c,
                                                grid_.spectral_size());
}

cplx SpectralField::coeff(int c, std::span<const int> modes) const {
  auto [s, conj] = grid_.spectral_index(modes);
  const cplx v = component(c)[s];
  return conj ? std::conj(v) : v;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same(grid_, o.grid_, ncomp_, o.ncomp_, "add");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same(grid_, o.grid_, ncomp_, o.ncomp_, "subtract");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& x : coeffs_) x *= s;
  return *this;
}

SpectralField& SpectralField::axpy(double s, const SpectralField& o) {
  require_same(grid_, o.grid_, ncomp_, o.ncomp_, "axpy");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
  return *this;
}

SpectralField SpectralField::component_field(int c) const {
  auto src = component(c);
  return SpectralField(grid_, 1, std::vector<cplx>(src.begin(), src.end()));
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField forward(const PhysicalField& f) {
  SpectralField out(f.grid(), f.ncomp());
  for (int c = 0; c < f.ncomp(); ++c) f.grid().forward(f.component(c), out.component(c));
  return out;
}

PhysicalField inverse(const SpectralField& f) {
  PhysicalField out(f.grid(), f.ncomp());
  for (int c = 0; c < f.ncomp(); ++c) f.grid().inverse(f.component(c), out.component(c));
  return out;
}

SpectralField transform(const Grid& grid, int ncomp, std::span<const double> samples) {
  if (samples.size() != grid.size() * static_cast<std::size_t>(ncomp))
    throw ConfigError("transform: array of " + std::to_string(samples.size()) +
                      " samples does not match grid shape x " + std::to_string(ncomp));
  return forward(PhysicalField(grid, ncomp, std::vector<double>(samples.begin(), samples.end())));
}

PhysicalField sample(const Grid& grid, int ncomp, const PointFunction& fn) {
  PhysicalField out(grid, ncomp);
  const int nd = grid.ndim();
  const std::size_t n = grid.size();
  std::array<double, 3> x{};
  std::vector<double> vals(ncomp);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t rem = p;
    for (int a = nd - 1; a >= 0; --a) {
      x[a] = grid.coord(a, static_cast<int>(rem % grid.dim(a)));
      rem /= grid.dim(a);
    }
    fn(x.data(), vals.data());
    for (int c = 0; c < ncomp; ++c) out.component(c)[p] = vals[c];
  }
  return out;
}

SpectralField stack(std::span<const SpectralField> parts) {
  if (parts.empty()) throw ConfigError("stack: no fields");
  int n = 0;
  for (const auto& p : parts) {
    if (!p.grid().same_shape(parts[0].grid())) throw ConfigError("stack: grids differ");
    n += p.ncomp();
  }
  SpectralField out(parts[0].grid(), n);
  int c = 0;
  for (const auto& p : parts)
    for (int i = 0; i < p.ncomp(); ++i, ++c) std::ranges::copy(p.component(i), out.component(c).begin());
  return out;
}

PhysicalField stack(std::span<const PhysicalField> parts) {
  if (parts.empty()) throw ConfigError("stack: no fields");
  int n = 0;
  for (const auto& p : parts) {
    if (!p.grid().same_shape(parts[0].grid())) throw ConfigError("stack: grids differ");
    n += p.ncomp();
  }
  PhysicalField out(parts[0].grid(), n);
  int c = 0;
  for (const auto& p : parts)
    for (int i = 0; i < p.ncomp(); ++i, ++c) std::ranges::copy(p.component(i), out.component(c).begin());
  return out;
}

}  // namespace nssl

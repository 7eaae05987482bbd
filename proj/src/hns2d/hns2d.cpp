#include "nssl/hns2d.hpp"

#include <cmath>
#include <string>

#include "nssl/error.hpp"
#include "nssl/spectral.hpp"
#include "nssl/stokes.hpp"

namespace nssl {

namespace {

void require_hns_field(const SpectralField& v) {
  if (v.grid().ndim() != 2 || v.ncomp() != 3)
    throw ConfigError("hns2d: state must have three components on a 2D grid");
}

// out = m .* a, componentwise per mode
SpectralField scaled(const std::vector<double>& m, const SpectralField& a) {
  SpectralField out = a;
  for (int c = 0; c < out.ncomp(); ++c) {
    auto d = out.component(c);
    for (std::size_t s = 0; s < d.size(); ++s) d[s] *= m[s];
  }
  return out;
}

}  // namespace

Hns2dSolver::Hns2dSolver(const SpectralField& v0, Hns2dOptions opt)
    : opt_(opt), v_(leray_project(v0)) {
  require_hns_field(v0);
  if (!(opt_.dt > 0.0)) throw ConfigError("hns2d: dt must be positive");
  if (!(opt_.cfl_limit > 0.0)) throw ConfigError("hns2d: cfl limit must be positive");
  const auto k2 = v_.grid().k_squared();
  for (std::size_t s = 0; s < k2.size(); ++s) {
    const double z = -k2[s] * opt_.dt;
    e_.push_back(std::exp(z));
    p1_.push_back(phi1(z));
    p2_.push_back(phi2(z));
    ehalf_.push_back(std::exp(0.5 * z));
  }
}

SpectralField Hns2dSolver::advective(const SpectralField& v, double* cfl_out) const {
  const Grid& g = v.grid();
  const SpectralField vd = opt_.dealias ? dealias(v) : v;
  const PhysicalField u = inverse(vd);
  const PhysicalField d1 = inverse(derivative(vd, 0));
  const PhysicalField d2 = inverse(derivative(vd, 1));
  PhysicalField adv(g, 3);
  const std::size_t n = g.size();
  auto u1 = u.component(0), u2 = u.component(1);
  for (int c = 0; c < 3; ++c) {
    auto a = adv.component(c);
    auto x = d1.component(c), y = d2.component(c);
    for (std::size_t p = 0; p < n; ++p) a[p] = u1[p] * x[p] + u2[p] * y[p];
  }
  if (cfl_out) {
    double m = 0.0;
    const double h1 = g.spacing(0), h2 = g.spacing(1);
    for (std::size_t p = 0; p < n; ++p) m = std::max(m, std::abs(u1[p]) / h1 + std::abs(u2[p]) / h2);
    *cfl_out = m * opt_.dt;
  }
  SpectralField out = forward(adv);
  if (opt_.dealias) dealias_inplace(out);
  return out;
}

SpectralField Hns2dSolver::nonlinear(const SpectralField& v) const {
  SpectralField n = leray_project(advective(v, nullptr));
  n *= -1.0;
  for (int c = 0; c < 3; ++c) n.component(c)[0] = 0.0;
  return n;
}

SpectralField Hns2dSolver::rhs(const SpectralField& v) const {
  SpectralField r = laplacian(v);
  r += nonlinear(v);
  return r;
}

SpectralField Hns2dSolver::pressure(const SpectralField& v) const {
  const SpectralField a = advective(v, nullptr);
  const Grid& g = v.grid();
  SpectralField p(g, 1);
  const auto k0 = g.k(0), k1 = g.k(1);
  const auto k2 = g.k_squared();
  auto dst = p.component(0);
  auto a0 = a.component(0), a1 = a.component(1);
  for (std::size_t s = 0; s < dst.size(); ++s) {
    const double kk = k0[s] * k0[s] + k1[s] * k1[s];
    if (kk == 0.0 || k2[s] == 0.0) continue;
    dst[s] = cplx(0.0, 1.0) * (k0[s] * a0[s] + k1[s] * a1[s]) / kk;
  }
  return p;
}

double Hns2dSolver::cfl(const SpectralField& v) const {
  double c = 0.0;
  advective(v, &c);
  return c;
}

const SpectralField& Hns2dSolver::current_nonlinear() const {
  if (!n_cur_) {
    SpectralField n = leray_project(advective(v_, &cfl_cur_));
    n *= -1.0;
    for (int c = 0; c < 3; ++c) n.component(c)[0] = 0.0;
    n_cur_ = std::move(n);
  }
  return *n_cur_;
}

void Hns2dSolver::step() {
  const double h = opt_.dt;
  SpectralField nn = current_nonlinear();
  const double c = cfl_cur_;
  if (c > opt_.cfl_limit)
    throw StabilityError("hns2d: CFL number " + std::to_string(c) + " exceeds limit " +
                             std::to_string(opt_.cfl_limit) + " at t = " + std::to_string(t_),
                         c);

  const std::size_t ns = grid().spectral_size();
  if (opt_.scheme == Hns2dScheme::kLawsonRK4) {
    const SpectralField& a = nn;
    SpectralField u2 = v_;
    u2.axpy(0.5 * h, a);
    u2 = scaled(ehalf_, u2);
    const SpectralField b = nonlinear(u2);
    SpectralField u3 = scaled(ehalf_, v_);
    u3.axpy(0.5 * h, b);
    const SpectralField cc = nonlinear(u3);
    SpectralField u4 = scaled(e_, v_);
    u4.axpy(h, scaled(ehalf_, cc));
    const SpectralField d = nonlinear(u4);
    SpectralField acc = scaled(e_, a);
    SpectralField bc = b;
    bc += cc;
    acc.axpy(2.0, scaled(ehalf_, bc));
    acc += d;
    SpectralField next = scaled(e_, v_);
    next.axpy(h / 6.0, acc);
    v_ = std::move(next);
  } else if (!n_prev_) {
    // Exponential RK2 start.
    SpectralField a = v_;
    for (int k = 0; k < 3; ++k) {
      auto ak = a.component(k);
      auto nk = nn.component(k);
      for (std::size_t s = 0; s < ns; ++s) ak[s] = e_[s] * ak[s] + h * p1_[s] * nk[s];
    }
    const SpectralField na = nonlinear(a);
    for (int k = 0; k < 3; ++k) {
      auto ak = a.component(k);
      auto nk = nn.component(k);
      auto mk = na.component(k);
      for (std::size_t s = 0; s < ns; ++s) ak[s] += h * p2_[s] * (mk[s] - nk[s]);
    }
    v_ = std::move(a);
  } else {
    for (int k = 0; k < 3; ++k) {
      auto vk = v_.component(k);
      auto nk = nn.component(k);
      auto pk = n_prev_->component(k);
      for (std::size_t s = 0; s < ns; ++s)
        vk[s] = e_[s] * vk[s] + h * (p1_[s] * nk[s] + p2_[s] * (nk[s] - pk[s]));
    }
  }
  for (const cplx& z : v_.data())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw NumericalError("hns2d: non-finite state at step " + std::to_string(steps_ + 1));
  n_prev_ = std::move(nn);
  n_cur_.reset();
  ++steps_;
  t_ = steps_ * h;
}

}  // namespace nssl

#include "nssl/error.hpp"
#include "nssl/ins3d.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

Background::Background(const SpectralField& v2d0, Grid grid3d, Hns2dOptions opt)
    : grid3d_(std::move(grid3d)), solver_(v2d0, opt) {
  const Grid& g2 = solver_.grid();
  if (grid3d_.ndim() != 3 || g2.dim(0) != grid3d_.dim(0) || g2.dim(1) != grid3d_.dim(1) ||
      g2.length(0) != grid3d_.length(0) || g2.length(1) != grid3d_.length(1))
    throw ConfigError("background: 3D grid must extend the 2D grid horizontally");
  traj_.push_back(solver_.v());
}

const SpectralField& Background::v(long j) {
  if (j < 0) throw ConfigError("background: negative time index");
  while (static_cast<long>(traj_.size()) <= j) {
    solver_.step();
    traj_.push_back(solver_.v());
  }
  return traj_[j];
}

SpectralField Background::v_t(long j) {
  const SpectralField& vj = v(j);
  SpectralField r = laplacian(vj);
  r += solver_.nonlinear(vj);
  return r;
}

BackgroundSamples Background::samples(long j) {
  const bool da = options().dealias;
  const SpectralField vj = da ? dealias(v(j)) : v(j);
  const SpectralField vt = v_t(j);
  BackgroundSamples s{inverse(vj), inverse(gradient_tensor(vj)), inverse(da ? dealias(vt) : vt),
                      PhysicalField(grid2d(), 3)};
  const std::size_t n = grid2d().size();
  for (int i = 0; i < 3; ++i) {
    auto a = s.adv.component(i);
    auto d0 = s.grad.component(2 * i), d1 = s.grad.component(2 * i + 1);
    auto v0 = s.v.component(0), v1 = s.v.component(1);
    for (std::size_t p = 0; p < n; ++p) a[p] = v0[p] * d0[p] + v1[p] * d1[p];
  }
  return s;
}

}  // namespace nssl

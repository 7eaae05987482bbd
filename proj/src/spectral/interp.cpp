#include "nssl/interp.hpp"

#include <cmath>

namespace nssl {

namespace {

struct AxisStencil {
  std::array<int, 4> idx;
  std::array<double, 4> w;
};

AxisStencil stencil(double x, double h, int n) {
  const double s = x / h;
  const double fl = std::floor(s);
  const double t = s - fl;
  const int i0 = static_cast<int>(static_cast<long long>(fl) % n);
  AxisStencil st;
  for (int q = 0; q < 4; ++q) st.idx[q] = ((i0 - 1 + q) % n + n) % n;
  st.w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  st.w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  st.w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  st.w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
  return st;
}

}  // namespace

CubicInterpolator::CubicInterpolator(Grid grid) : grid_(std::move(grid)) {}

void CubicInterpolator::eval(std::span<const std::span<const double>> fields, const double* x,
                             double* out) const {
  const int nd = grid_.ndim();
  std::array<AxisStencil, 3> st;
  for (int a = 0; a < nd; ++a) st[a] = stencil(x[a], grid_.spacing(a), grid_.dim(a));
  for (std::size_t f = 0; f < fields.size(); ++f) out[f] = 0.0;
  if (nd == 2) {
    const int n1 = grid_.dim(1);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double w = st[0].w[i] * st[1].w[j];
        const std::size_t p = static_cast<std::size_t>(st[0].idx[i]) * n1 + st[1].idx[j];
        for (std::size_t f = 0; f < fields.size(); ++f) out[f] += w * fields[f][p];
      }
    return;
  }
  const int n1 = grid_.dim(1), n2 = grid_.dim(2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double wij = st[0].w[i] * st[1].w[j];
      const std::size_t row = (static_cast<std::size_t>(st[0].idx[i]) * n1 + st[1].idx[j]) * n2;
      for (int l = 0; l < 4; ++l) {
        const double w = wij * st[2].w[l];
        const std::size_t p = row + st[2].idx[l];
        for (std::size_t f = 0; f < fields.size(); ++f) out[f] += w * fields[f][p];
      }
    }
}

double CubicInterpolator::eval(std::span<const double> field, const double* x) const {
  const std::span<const double> one[1] = {field};
  double v = 0.0;
  eval(one, x, &v);
  return v;
}

std::vector<std::span<const double>> component_spans(std::span<const double> data,
                                                     std::size_t points, int ncomp) {
  std::vector<std::span<const double>> out;
  for (int c = 0; c < ncomp; ++c) out.push_back(data.subspan(points * c, points));
  return out;
}

}  // namespace nssl

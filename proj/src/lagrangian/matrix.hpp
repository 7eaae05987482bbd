#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace nssl::detail {

// 2D matrices are embedded in the upper-left block; `pad` fills entry (2, 2).
using Mat = Eigen::Matrix3d;

inline Mat load(const double* m, int nd, double pad) {
  Mat out = Mat::Zero();
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j < nd; ++j) out(i, j) = m[i * nd + j];
  if (nd == 2) out(2, 2) = pad;
  return out;
}

inline double op_norm(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es;
  es.computeDirect(m.transpose() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace nssl::detail

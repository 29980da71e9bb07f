#pragma once
// Nearest rotation (polar factor) and distance to SO(3) via the 3x3 SVD.
// When det F < 0 the smallest singular value flips sign in the projection,
// i.e. the last column of V is negated — the standard orientation fix.

#include <cmath>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "mvk/core.hpp"
#include "mvk/grid.hpp"

namespace mvk {

inline Mat3 nearest_rotation(const Mat3& f) {
  if (!(f.norm() > 1e-300)) throw NumericalError("nearest_rotation: zero matrix has no polar factor");
  Eigen::JacobiSVD<Mat3> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) v.col(2) *= -1.0;
  return u * v.transpose();
}

inline double dist_SO3(const Mat3& f) {
  Eigen::JacobiSVD<Mat3> svd(f);
  const Vec3 s = svd.singularValues();  // descending
  const double sign = (f.determinant() >= 0.0) ? 1.0 : -1.0;
  const double d0 = s(0) - 1.0, d1 = s(1) - 1.0, d2 = s(2) - sign;
  return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
}

}  // namespace mvk

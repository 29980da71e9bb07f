#pragma once
// Stored energies, their quadratic forms at the identity, and the reduction
// from the 3D form Q3 to the plane-stress form Q2.
//
// Two energy models:
//  * Saint Venant-Kirchhoff,  W = (lambda/8) tr(F^T F - I)^2 + (mu/4) |F^T F - I|^2,
//    whose Hessian at I gives Q3(F) = 2 mu |sym F|^2 + lambda (tr F)^2.
//  * Squared distance to SO(3), W = dist^2(F, SO(3)), which linearizes to
//    Q3(F) = 2 |sym F|^2, i.e. effective mu = 1, lambda = 0. Unlike StVK it is
//    globally coercive: W >= dist^2 holds with constant exactly 1.
//
// Q2(G) = min_a Q3( embed(G) + a ox e3 + e3 ox a ). The minimizing a is linear
// in G (L_map); for isotropic Q3 it points along e3 with
// a3 = -lambda tr G / (2 (2 mu + lambda)), giving the familiar
// Q2(G) = 2 mu |sym G|^2 + (2 mu lambda / (2 mu + lambda)) (tr G)^2.
// Q2_by_minimization solves the 3x3 stationarity system exactly instead, so
// the pair can cross-check each other.

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mvk/grid.hpp"
#include "mvk/polar.hpp"

namespace mvk {

enum class MaterialKind { StVenantKirchhoff, SquaredDistance };

struct Material {
  MaterialKind kind = MaterialKind::StVenantKirchhoff;
  double lambda = 1.0;
  double mu = 1.0;

  Material() = default;
  Material(MaterialKind k, double lam, double mu_) : kind(k), lambda(lam), mu(mu_) {
    if (!(mu > 0.0) || lambda < 0.0)
      throw ConfigError("Material: need mu > 0 and lambda >= 0");
  }

  // Lame constants of the quadratic forms; the squared-distance model has
  // them pinned by its Hessian at the identity.
  double mu_q() const { return kind == MaterialKind::SquaredDistance ? 1.0 : mu; }
  double lambda_q() const { return kind == MaterialKind::SquaredDistance ? 0.0 : lambda; }
};

inline double W(const Material& mat, const Mat3& f) {
  if (mat.kind == MaterialKind::StVenantKirchhoff) {
    const Mat3 c = f.transpose() * f - Mat3::Identity();
    const double tr = c.trace();
    return mat.lambda / 8.0 * tr * tr + mat.mu / 4.0 * c.squaredNorm();
  }
  const double d = dist_SO3(f);
  return d * d;
}

// dW/dF. For the squared-distance model this is 2 (F - R(F)) with R the
// nearest rotation (the gradient of a squared distance to a smooth manifold).
inline Mat3 dW(const Material& mat, const Mat3& f) {
  if (mat.kind == MaterialKind::StVenantKirchhoff) {
    const Mat3 c = f.transpose() * f - Mat3::Identity();
    return f * (mat.lambda / 2.0 * c.trace() * Mat3::Identity() + mat.mu * c);
  }
  return 2.0 * (f - nearest_rotation(f));
}

inline double Q3(const Material& mat, const Mat3& f) {
  const Mat3 s = 0.5 * (f + f.transpose());
  const double tr = f.trace();
  return 2.0 * mat.mu_q() * s.squaredNorm() + mat.lambda_q() * tr * tr;
}

inline double Q2(const Material& mat, const Mat2& g) {
  const Mat2 s = 0.5 * (g + g.transpose());
  const double tr = g.trace();
  const double mu = mat.mu_q(), lam = mat.lambda_q();
  return 2.0 * mu * s.squaredNorm() + (2.0 * mu * lam / (2.0 * mu + lam)) * tr * tr;
}

namespace detail {
// Symmetric bilinear form of Q3 by polarization.
inline double q3_bilinear(const Material& mat, const Mat3& x, const Mat3& y) {
  return 0.25 * (Q3(mat, x + y) - Q3(mat, x - y));
}
}  // namespace detail

struct Q2MinResult {
  double value = 0.0;
  Vec3 a = Vec3::Zero();
};

// Minimizes Q3(embed(G) + a ox e3 + e3 ox a) over a in R^3 by solving the
// 3x3 stationarity system exactly. Generic in Q3 (uses only its values).
inline Q2MinResult Q2_by_minimization(const Material& mat, const Mat2& g) {
  Mat3 s = Mat3::Zero();
  s.topLeftCorner<2, 2>() = g;
  Mat3 basis[3];
  for (int i = 0; i < 3; ++i) {
    basis[i] = Mat3::Zero();
    basis[i](i, 2) += 1.0;
    basis[i](2, i) += 1.0;
  }
  Mat3 k;
  Vec3 r;
  for (int i = 0; i < 3; ++i) {
    r(i) = detail::q3_bilinear(mat, s, basis[i]);
    for (int j = 0; j < 3; ++j) k(i, j) = detail::q3_bilinear(mat, basis[i], basis[j]);
  }
  // quadratic in a: Q3(s) + 2 r.a + a^T k a; positive definite since Q3 is
  Eigen::LDLT<Mat3> ldlt(k);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("Q2_by_minimization: stationarity system not positive definite");
  Q2MinResult out;
  out.a = ldlt.solve(-r);
  out.value = Q3(mat, s + basis[0] * out.a(0) + basis[1] * out.a(1) + basis[2] * out.a(2));
  return out;
}

// The linear map A -> argmin of the relaxation above; feeds the recovery
// correctors.
inline Vec3 L_map(const Material& mat, const Mat2& a) { return Q2_by_minimization(mat, a).a; }

}  // namespace mvk

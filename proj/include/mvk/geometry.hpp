#pragma once
// Shallow-shell immersion of the thin slab and its exact gradient.
//
// The midsurface graph is x' -> (x', fh*theta(x')); the slab of thickness h
// around it is
//     Theta(x', x3h) = (x', fh*theta(x')) + x3h * a3(x'),   x3h in [-h/2, h/2],
// with a3 the unit normal of the graph and
//     alpha(x') = 1 + fh^2 |grad theta|^2,   a3 = alpha^{-1/2} (-fh*grad theta, 1).
// grad_theta_map below writes out the exact closed-form entries of
// grad Theta (the derivative of a3 contributes the alpha^{-3/2} terms).
// For small fh this gradient is I - fh*C + O(max(fh^2, h*fh)) with C the
// antisymmetric matrix built from grad theta; the expansion is exercised by
// the geometry tests, while the energy code always uses the exact entries.

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "mvk/grid.hpp"
#include "mvk/midsurface.hpp"

namespace mvk {

struct ShellGeometry {
  Midsurface ms;
  double h = 0.0;   // slab thickness; thickness coordinate spans (-h/2, h/2)
  double fh = 0.0;  // midsurface height scale

  ShellGeometry() = default;
  ShellGeometry(Midsurface m, double h_, double fh_) : ms(std::move(m)), h(h_), fh(fh_) {
    if (!(h > 0.0)) throw ConfigError("ShellGeometry: thickness h must be positive");
    if (fh < 0.0) throw ConfigError("ShellGeometry: height scale fh must be >= 0");
  }
};

inline double alpha_h(const ShellGeometry& geo, const Vec2& x) {
  const Vec2 t = geo.ms.grad(x);
  return 1.0 + geo.fh * geo.fh * t.squaredNorm();
}

inline Vec3 normal_a3(const ShellGeometry& geo, const Vec2& x) {
  const Vec2 t = geo.ms.grad(x);
  const double a = 1.0 + geo.fh * geo.fh * t.squaredNorm();
  const double s = 1.0 / std::sqrt(a);
  return Vec3(-geo.fh * t.x() * s, -geo.fh * t.y() * s, s);
}

inline Vec3 theta_map(const ShellGeometry& geo, const Vec2& x, double x3h) {
  const Vec3 base(x.x(), x.y(), geo.fh * geo.ms.theta(x));
  return base + x3h * normal_a3(geo, x);
}

// Exact gradient of the immersion at (x', x3h). Column 3 is a3 itself.
inline Mat3 grad_theta_map(const ShellGeometry& geo, const Vec2& x, double x3h) {
  const double fh = geo.fh;
  const Vec2 t = geo.ms.grad(x);
  const Mat2 H = geo.ms.hess(x);
  const double a = 1.0 + fh * fh * t.squaredNorm();
  const double am12 = 1.0 / std::sqrt(a);
  const double am32 = am12 / a;
  // d_b alpha = 2 fh^2 (H t)_b since H is symmetric
  const Vec2 da = 2.0 * fh * fh * (H * t);

  Mat3 m;
  m(0, 0) = 1.0 - 0.5 * fh * x3h * am32 * (2.0 * a * H(0, 0) - da.x() * t.x());
  m(0, 1) = -0.5 * fh * x3h * am32 * (2.0 * a * H(0, 1) - da.y() * t.x());
  m(0, 2) = -fh * am12 * t.x();
  m(1, 0) = -0.5 * fh * x3h * am32 * (2.0 * a * H(1, 0) - da.x() * t.y());
  m(1, 1) = 1.0 - 0.5 * fh * x3h * am32 * (2.0 * a * H(1, 1) - da.y() * t.y());
  m(1, 2) = -fh * am12 * t.y();
  m(2, 0) = fh * t.x() - 0.5 * x3h * am32 * da.x();
  m(2, 1) = fh * t.y() - 0.5 * x3h * am32 * da.y();
  m(2, 2) = am12;
  return m;
}

// Antisymmetric first-order coefficient of the small-fh expansion of the
// immersion gradient: entries (1,3) and (2,3) are the theta slopes.
inline Mat3 matrix_C(const ShellGeometry& geo, const Vec2& x) {
  const Vec2 t = geo.ms.grad(x);
  Mat3 c = Mat3::Zero();
  c(0, 2) = t.x();
  c(1, 2) = t.y();
  c(2, 0) = -t.x();
  c(2, 1) = -t.y();
  return c;
}

inline double det_grad_theta_map(const ShellGeometry& geo, const Vec2& x, double x3h) {
  return grad_theta_map(geo, x, x3h).determinant();
}

inline Mat3 inverse_grad_theta_map(const ShellGeometry& geo, const Vec2& x, double x3h) {
  const Mat3 m = grad_theta_map(geo, x, x3h);
  const double d = m.determinant();
  if (!(d > 1e-12))
    throw NumericalError(
        "inverse_grad_theta_map: immersion gradient singular or orientation-reversing here");
  return m.inverse();
}

// Smallest immersion determinant over the sample grid and the extreme
// thickness coordinates; the admissibility guard below keeps it above floor.
inline double min_det_over_grid(const Midsurface& ms, double h, double fh, const Grid2& g) {
  ShellGeometry geo(ms, h, fh);
  double dmin = std::numeric_limits<double>::infinity();
  const double levels[3] = {-0.5 * h, 0.0, 0.5 * h};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (double x3h : levels)
        dmin = std::min(dmin, det_grad_theta_map(geo, g.node(i, j), x3h));
  return dmin;
}

// Largest admissible height scale: bisection on min det > det_floor.
inline double fh_max(const Midsurface& ms, double h, const Grid2& g, double det_floor = 0.5) {
  if (min_det_over_grid(ms, h, 0.0, g) <= det_floor)
    throw NumericalError("fh_max: geometry inadmissible already at fh = 0");
  double lo = 0.0, hi = 1.0;
  // grow until inadmissible (or give up at a huge scale: flat surfaces never fail)
  while (min_det_over_grid(ms, h, hi, g) > det_floor) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) return hi;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (min_det_over_grid(ms, h, mid, g) > det_floor)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

inline void require_admissible(const ShellGeometry& geo, const Grid2& g, double det_floor = 0.5) {
  const double dmin = min_det_over_grid(geo.ms, geo.h, geo.fh, g);
  if (!(dmin > det_floor))
    throw NumericalError("shell geometry inadmissible: min immersion det " +
                         std::to_string(dmin) + " <= " + std::to_string(det_floor));
}

}  // namespace mvk

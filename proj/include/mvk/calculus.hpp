#pragma once
// Discrete calculus on the grids: gradients, hessians, the thickness-scaled
// 3D gradient, their exact adjoints (plain transposes of the stencil maps,
// used by the analytic energy gradients), and quadrature.
//
// Quadrature is trapezoidal in-plane and Simpson through the thickness; the
// thickness rule must integrate quadratics exactly because the recovery
// ansatz is quadratic in x3 and its bending term would otherwise pick up a
// resolution-independent bias at the small default layer counts.

#include <cmath>
#include <vector>

#include "mvk/grid.hpp"
#include "mvk/stencil.hpp"

namespace mvk {

// -- 2D operators ------------------------------------------------------------

inline Field2<Vec2> grad2(const Field2<double>& f) {
  const Grid2& g = f.grid;
  Field2<Vec2> out(g);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const int i = static_cast<int>(n % g.nx);
      const int j = static_cast<int>(n / g.nx);
      const StencilRow rx = d1_row(g.nx, i, g.hx);
      const StencilRow ry = d1_row(g.ny, j, g.hy);
      double gx = 0.0, gy = 0.0;
      for (int t = 0; t < rx.len; ++t) gx += rx.w[t] * f(rx.idx[t], j);
      for (int t = 0; t < ry.len; ++t) gy += ry.w[t] * f(i, ry.idx[t]);
      out[n] = Vec2(gx, gy);
    }
  });
  return out;
}

// (grad u)_{ab} = d_b u_a for a 2-vector field u.
inline Field2<Mat2> grad2_vec(const Field2<Vec2>& u) {
  const Grid2& g = u.grid;
  Field2<Mat2> out(g);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const int i = static_cast<int>(n % g.nx);
      const int j = static_cast<int>(n / g.nx);
      const StencilRow rx = d1_row(g.nx, i, g.hx);
      const StencilRow ry = d1_row(g.ny, j, g.hy);
      Mat2 m = Mat2::Zero();
      for (int t = 0; t < rx.len; ++t) m.col(0) += rx.w[t] * u(rx.idx[t], j);
      for (int t = 0; t < ry.len; ++t) m.col(1) += ry.w[t] * u(i, ry.idx[t]);
      out[n] = m;
    }
  });
  return out;
}

// Mixed entries come from nesting the two first-derivative stencils; the two
// nesting orders agree exactly because the axis stencils commute.
inline Field2<Mat2> hessian2(const Field2<double>& f) {
  const Grid2& g = f.grid;
  Field2<double> fx(g);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const int i = static_cast<int>(n % g.nx);
      const int j = static_cast<int>(n / g.nx);
      const StencilRow rx = d1_row(g.nx, i, g.hx);
      double s = 0.0;
      for (int t = 0; t < rx.len; ++t) s += rx.w[t] * f(rx.idx[t], j);
      fx[n] = s;
    }
  });
  Field2<Mat2> out(g);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const int i = static_cast<int>(n % g.nx);
      const int j = static_cast<int>(n / g.nx);
      const StencilRow sx = d2_row(g.nx, i, g.hx);
      const StencilRow sy = d2_row(g.ny, j, g.hy);
      const StencilRow ry = d1_row(g.ny, j, g.hy);
      double hxx = 0.0, hyy = 0.0, hxy = 0.0;
      for (int t = 0; t < sx.len; ++t) hxx += sx.w[t] * f(sx.idx[t], j);
      for (int t = 0; t < sy.len; ++t) hyy += sy.w[t] * f(i, sy.idx[t]);
      for (int t = 0; t < ry.len; ++t) hxy += ry.w[t] * fx(i, ry.idx[t]);
      Mat2 m;
      m << hxx, hxy, hxy, hyy;
      out[n] = m;
    }
  });
  return out;
}

// -- adjoints (scatter form; run serially so the add order is fixed) ---------

inline Field2<double> grad2_adjoint(const Field2<Vec2>& s) {
  const Grid2& g = s.grid;
  Field2<double> out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2& v = s(i, j);
      const StencilRow rx = d1_row(g.nx, i, g.hx);
      const StencilRow ry = d1_row(g.ny, j, g.hy);
      for (int t = 0; t < rx.len; ++t) out(rx.idx[t], j) += rx.w[t] * v.x();
      for (int t = 0; t < ry.len; ++t) out(i, ry.idx[t]) += ry.w[t] * v.y();
    }
  return out;
}

inline Field2<Vec2> grad2_vec_adjoint(const Field2<Mat2>& s) {
  const Grid2& g = s.grid;
  Field2<Vec2> out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Mat2& m = s(i, j);
      const StencilRow rx = d1_row(g.nx, i, g.hx);
      const StencilRow ry = d1_row(g.ny, j, g.hy);
      for (int t = 0; t < rx.len; ++t) out(rx.idx[t], j) += rx.w[t] * m.col(0);
      for (int t = 0; t < ry.len; ++t) out(i, ry.idx[t]) += ry.w[t] * m.col(1);
    }
  return out;
}

inline Field2<double> hessian2_adjoint(const Field2<Mat2>& s) {
  const Grid2& g = s.grid;
  Field2<double> out(g);
  Field2<double> tmp(g);  // cotangent of the intermediate d/dx field
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Mat2& m = s(i, j);
      const StencilRow sx = d2_row(g.nx, i, g.hx);
      const StencilRow sy = d2_row(g.ny, j, g.hy);
      const StencilRow ry = d1_row(g.ny, j, g.hy);
      for (int t = 0; t < sx.len; ++t) out(sx.idx[t], j) += sx.w[t] * m(0, 0);
      for (int t = 0; t < sy.len; ++t) out(i, sy.idx[t]) += sy.w[t] * m(1, 1);
      const double off = m(0, 1) + m(1, 0);
      for (int t = 0; t < ry.len; ++t) tmp(i, ry.idx[t]) += ry.w[t] * off;
    }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const StencilRow rx = d1_row(g.nx, i, g.hx);
      for (int t = 0; t < rx.len; ++t) out(rx.idx[t], j) += rx.w[t] * tmp(i, j);
    }
  return out;
}

// -- 3D scaled gradient -------------------------------------------------------
// Column 3 carries the 1/h from differentiating through the thickness
// rescaling, so the result matches the physical deformation gradient once
// multiplied by the inverse immersion gradient.

inline Field3<Mat3> grad3_scaled(const Field3<Vec3>& y, double h) {
  const Grid3& g = y.grid;
  const Grid2& p = g.plane;
  Field3<Mat3> out(g);
  const double invh = 1.0 / h;
  const std::size_t layer = p.size();
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const int k = static_cast<int>(n / layer);
      const std::size_t r = n % layer;
      const int i = static_cast<int>(r % p.nx);
      const int j = static_cast<int>(r / p.nx);
      const StencilRow rx = d1_row(p.nx, i, p.hx);
      const StencilRow ry = d1_row(p.ny, j, p.hy);
      const StencilRow rz = d1_row(g.nz, k, g.hz);
      Mat3 m = Mat3::Zero();
      for (int t = 0; t < rx.len; ++t) m.col(0) += rx.w[t] * y(rx.idx[t], j, k);
      for (int t = 0; t < ry.len; ++t) m.col(1) += ry.w[t] * y(i, ry.idx[t], k);
      for (int t = 0; t < rz.len; ++t) m.col(2) += (invh * rz.w[t]) * y(i, j, rz.idx[t]);
      out[n] = m;
    }
  });
  return out;
}

inline Field3<Vec3> grad3_scaled_adjoint(const Field3<Mat3>& s, double h) {
  const Grid3& g = s.grid;
  const Grid2& p = g.plane;
  Field3<Vec3> out(g);
  const double invh = 1.0 / h;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < p.ny; ++j)
      for (int i = 0; i < p.nx; ++i) {
        const Mat3& m = s(i, j, k);
        const StencilRow rx = d1_row(p.nx, i, p.hx);
        const StencilRow ry = d1_row(p.ny, j, p.hy);
        const StencilRow rz = d1_row(g.nz, k, g.hz);
        for (int t = 0; t < rx.len; ++t) out(rx.idx[t], j, k) += rx.w[t] * m.col(0);
        for (int t = 0; t < ry.len; ++t) out(i, ry.idx[t], k) += ry.w[t] * m.col(1);
        for (int t = 0; t < rz.len; ++t) out(i, j, rz.idx[t]) += (invh * rz.w[t]) * m.col(2);
      }
  return out;
}

// -- quadrature ---------------------------------------------------------------

inline Field2<double> weights2(const Grid2& g) {
  Field2<double> w(g);
  for (int j = 0; j < g.ny; ++j) {
    const double ty = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    for (int i = 0; i < g.nx; ++i) {
      const double tx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      w(i, j) = g.hx * g.hy * tx * ty;
    }
  }
  return w;
}

inline double simpson_weight(int nz, int k, double hz) {
  if (k == 0 || k == nz - 1) return hz / 3.0;
  return (k % 2 == 1) ? 4.0 * hz / 3.0 : 2.0 * hz / 3.0;
}

inline Field3<double> weights3(const Grid3& g) {
  Field3<double> w(g);
  const Field2<double> wp = weights2(g.plane);
  for (int k = 0; k < g.nz; ++k) {
    const double wz = simpson_weight(g.nz, k, g.hz);
    for (int j = 0; j < g.plane.ny; ++j)
      for (int i = 0; i < g.plane.nx; ++i) w(i, j, k) = wp(i, j) * wz;
  }
  return w;
}

inline double integrate2(const Field2<double>& f) {
  const Field2<double> w = weights2(f.grid);
  std::vector<double> buf(f.size());
  parallel_for(f.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) buf[n] = w[n] * f[n];
  });
  return pairwise_sum(buf);
}

inline double integrate3(const Field3<double>& f) {
  const Field3<double> w = weights3(f.grid);
  std::vector<double> buf(f.size());
  parallel_for(f.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) buf[n] = w[n] * f[n];
  });
  return pairwise_sum(buf);
}

inline double integrate2_product(const Field2<double>& a, const Field2<double>& b) {
  if (!a.grid.same_layout(b.grid))
    throw ConfigError("integrate2_product: fields on different grids");
  const Field2<double> w = weights2(a.grid);
  std::vector<double> buf(a.size());
  parallel_for(a.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) buf[n] = w[n] * a[n] * b[n];
  });
  return pairwise_sum(buf);
}

// Transverse loads must not do work on vertical translations: a nonzero mean
// would make the loaded functionals unbounded below.
inline void require_zero_mean(const Field2<double>& f) {
  const double mean_integral = integrate2(f);
  double nrm2 = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) nrm2 += f[n] * f[n];
  const double nrm = std::sqrt(nrm2);
  if (nrm > 0.0 && std::abs(mean_integral) > 1e-10 * nrm)
    throw NumericalError("transverse load must have zero mean over the midsurface domain");
}

// Pointwise map of a field to scalars (norm/error surveys, integrands).
template <class V, class F>
Field2<double> map2(const Field2<V>& f, F&& fn) {
  Field2<double> out(f.grid);
  parallel_for(f.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) out[n] = fn(f[n]);
  });
  return out;
}

template <class V, class F>
Field3<double> map3(const Field3<V>& f, F&& fn) {
  Field3<double> out(f.grid);
  parallel_for(f.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) out[n] = fn(f[n]);
  });
  return out;
}

}  // namespace mvk

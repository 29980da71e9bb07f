#pragma once
// The two-dimensional limit functionals and their exact discrete gradients.
//
// For a displacement pair (u, v) on the midsurface with height theta,
//   E(u,v) = sym grad u + (1/2) grad v ox grad v [von Karman regime only]
//            + sym(grad v ox grad theta)
//   I(u,v) = Int_omega  (1/2) Q2(E) + (1/24) Q2(hess v)
//   J0     = I - R33 * Int f3 v + g(Rbar).
//
// theta enters the membrane strain through the *discrete* gradient of its
// nodal samples. That makes the shear-of-graph gauge transform an exact
// nodewise symmetry of the strain (the transform adds (v+theta)*a to u, whose
// discrete gradient is a ox G(v+theta) with the same stencil), instead of a
// symmetry up to stencil error.

#include <cmath>

#include <Eigen/LU>

#include "mvk/calculus.hpp"
#include "mvk/material.hpp"
#include "mvk/midsurface.hpp"
#include "mvk/regime.hpp"

namespace mvk {

struct Displacement2D {
  Field2<Vec2> u;
  Field2<double> v;

  Displacement2D() = default;
  explicit Displacement2D(const Grid2& g) : u(g), v(g) {}
};

namespace detail {

inline void check_same_grid(const Displacement2D& d) {
  if (!d.u.grid.same_layout(d.v.grid))
    throw ConfigError("Displacement2D: u and v must share one grid");
}

inline Field2<double> sample_theta(const Midsurface& ms, const Grid2& g) {
  return sample2(g, [&](const Vec2& x) { return ms.theta(x); });
}

// dQ2/dE at a symmetric 2x2 strain.
inline Mat2 q2_stress(const Material& mat, const Mat2& e) {
  const double mu = mat.mu_q(), lam = mat.lambda_q();
  const double kappa = 2.0 * mu * lam / (2.0 * mu + lam);
  return 4.0 * mu * e + 2.0 * kappa * e.trace() * Mat2::Identity();
}

}  // namespace detail

inline Field2<Mat2> membrane_strain(const Displacement2D& d, const Midsurface& ms,
                                    const Regime& regime) {
  detail::check_same_grid(d);
  const Grid2& g = d.v.grid;
  const Field2<Mat2> du = grad2_vec(d.u);
  const Field2<Vec2> gv = grad2(d.v);
  const Field2<Vec2> gt = grad2(detail::sample_theta(ms, g));
  const double cq = (regime.kind == RegimeKind::MvK) ? 1.0 : 0.0;
  Field2<Mat2> out(g);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const Mat2 sym_du = 0.5 * (du[n] + du[n].transpose());
      const Mat2 vv = gv[n] * gv[n].transpose();
      const Mat2 vt = gv[n] * gt[n].transpose();
      out[n] = sym_du + 0.5 * cq * vv + 0.5 * (vt + vt.transpose());
    }
  });
  return out;
}

struct EnergyBreakdown {
  double membrane = 0.0;
  double bending = 0.0;
  double force = 0.0;   // the force *action*; it enters the total with a minus
  double penalty = 0.0;
  double total() const { return membrane + bending - force + penalty; }
};

inline EnergyBreakdown limit_energy_breakdown(const Displacement2D& d, const Midsurface& ms,
                                              const Material& mat, const Regime& regime) {
  const Field2<Mat2> e = membrane_strain(d, ms, regime);
  const Field2<Mat2> hv = hessian2(d.v);
  EnergyBreakdown out;
  out.membrane = integrate2(map2(e, [&](const Mat2& m) { return 0.5 * Q2(mat, m); }));
  out.bending = integrate2(map2(hv, [&](const Mat2& m) { return Q2(mat, m) / 24.0; }));
  return out;
}

inline double I_limit(const Displacement2D& d, const Midsurface& ms, const Material& mat,
                      const Regime& regime) {
  return limit_energy_breakdown(d, ms, mat, regime).total();
}

// Loaded limit functional at a fixed frame rotation Rbar; only its (3,3)
// entry and the penalty value g(Rbar) enter. A load with nonzero mean is
// rejected: constant shifts of v would drive the functional to -infinity.
inline double J0(const Displacement2D& d, const Midsurface& ms, const Material& mat,
                 const Regime& regime, const Field2<double>& f3bar, double r33 = 1.0,
                 double gval = 0.0) {
  detail::check_same_grid(d);
  if (!f3bar.grid.same_layout(d.v.grid))
    throw ConfigError("J0: load grid must match displacement grid");
  require_zero_mean(f3bar);
  EnergyBreakdown b = limit_energy_breakdown(d, ms, mat, regime);
  b.force = r33 * integrate2_product(d.v, f3bar);
  b.penalty = gval;
  return b.total();
}

// Exact gradient of the discrete functional (adjoint of the stencil maps and
// quadrature weights); pass f3bar = nullptr for the unloaded I.
inline Displacement2D limit_gradient(const Displacement2D& d, const Midsurface& ms,
                                     const Material& mat, const Regime& regime,
                                     const Field2<double>* f3bar = nullptr, double r33 = 1.0) {
  detail::check_same_grid(d);
  const Grid2& g = d.v.grid;
  const Field2<double> w = weights2(g);
  const Field2<Mat2> e = membrane_strain(d, ms, regime);
  const Field2<Mat2> hv = hessian2(d.v);
  const Field2<Vec2> gv = grad2(d.v);
  const Field2<Vec2> gt = grad2(detail::sample_theta(ms, g));
  const double cq = (regime.kind == RegimeKind::MvK) ? 1.0 : 0.0;

  Field2<Mat2> su(g);        // cotangent of grad u
  Field2<Vec2> sg(g);        // cotangent of grad v
  Field2<Mat2> sh(g);        // cotangent of hess v
  parallel_for(g.size(), [&](std::size_t b, std::size_t ee) {
    for (std::size_t n = b; n < ee; ++n) {
      const Mat2 stress = detail::q2_stress(mat, e[n]);
      su[n] = 0.5 * w[n] * stress;
      sg[n] = 0.5 * w[n] * (stress * (cq * gv[n] + gt[n]));
      sh[n] = (w[n] / 24.0) * detail::q2_stress(mat, hv[n]);
    }
  });

  Displacement2D grad(g);
  grad.u = grad2_vec_adjoint(su);
  Field2<double> gv_part = grad2_adjoint(sg);
  Field2<double> gh_part = hessian2_adjoint(sh);
  for (std::size_t n = 0; n < g.size(); ++n) {
    grad.v[n] = gv_part[n] + gh_part[n];
    if (f3bar) grad.v[n] -= r33 * w[n] * (*f3bar)[n];
  }
  return grad;
}

// In-plane shear-of-graph change of variables: slope a, offset b. Leaves the
// membrane strain invariant nodewise and the bending term unchanged.
inline Displacement2D gauge_transform(const Displacement2D& d, const Midsurface& ms,
                                      const Vec2& a, double b) {
  detail::check_same_grid(d);
  const Grid2& g = d.v.grid;
  const Field2<double> th = detail::sample_theta(ms, g);
  Displacement2D out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.node(i, j);
      const double vth = d.v(i, j) + th(i, j);
      out.u(i, j) = d.u(i, j) + vth * a - 0.5 * a.dot(x) * a;
      out.v(i, j) = d.v(i, j) - a.dot(x) - b;
    }
  return out;
}

// d22 e11 + d11 e22 - 2 d12 e12: vanishes (to stencil error) iff e is a
// linearized strain of some in-plane displacement.
inline Field2<double> compatibility_residual(const Field2<Mat2>& e) {
  const Grid2& g = e.grid;
  if (g.nx < 5 || g.ny < 5)
    throw ConfigError("compatibility_residual: need at least 5 nodes per axis");
  Field2<double> e00(g), e11(g), e01(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    e00[n] = e[n](0, 0);
    e11[n] = e[n](1, 1);
    e01[n] = 0.5 * (e[n](0, 1) + e[n](1, 0));
  }
  const Field2<Mat2> h00 = hessian2(e00);
  const Field2<Mat2> h11 = hessian2(e11);
  const Field2<Mat2> h01 = hessian2(e01);
  Field2<double> out(g);
  for (std::size_t n = 0; n < g.size(); ++n)
    out[n] = h00[n](1, 1) + h11[n](0, 0) - 2.0 * h01[n](0, 1);
  return out;
}

// L2 distance between displacement pairs, || (ua - ub, va - vb) ||_L2(omega).
inline double displacement_l2_distance(const Displacement2D& a, const Displacement2D& b) {
  detail::check_same_grid(a);
  detail::check_same_grid(b);
  const Grid2& g = a.v.grid;
  if (!g.same_layout(b.v.grid))
    throw ConfigError("displacement_l2_distance: operands on different grids");
  const Field2<double> w = weights2(g);
  std::vector<double> buf(g.size());
  parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) {
      const double dv = a.v[n] - b.v[n];
      buf[n] = w[n] * ((a.u[n] - b.u[n]).squaredNorm() + dv * dv);
    }
  });
  return std::sqrt(pairwise_sum(buf));
}

// det hess(v + theta) - det hess(theta): the Gauss-curvature change of the
// graph at unit height scale; zero for bendings of a developable graph.
inline Field2<double> gauss_residual(const Field2<double>& v, const Midsurface& ms) {
  const Grid2& g = v.grid;
  if (g.nx < 5 || g.ny < 5)
    throw ConfigError("gauss_residual: need at least 5 nodes per axis");
  const Field2<double> th = detail::sample_theta(ms, g);
  Field2<double> vpth(g);
  for (std::size_t n = 0; n < g.size(); ++n) vpth[n] = v[n] + th[n];
  const Field2<Mat2> ha = hessian2(vpth);
  const Field2<Mat2> hb = hessian2(th);
  Field2<double> out(g);
  for (std::size_t n = 0; n < g.size(); ++n)
    out[n] = ha[n].determinant() - hb[n].determinant();
  return out;
}

}  // namespace mvk

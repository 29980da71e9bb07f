#pragma once
// Midsurface height functions theta : omega -> R. Built-in families carry
// analytic first and second derivatives; grid-sampled surfaces differentiate
// their samples (fourth-order interior rows, one-sided second-order at the
// boundary) and interpolate bilinearly between nodes.

#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "mvk/calculus.hpp"
#include "mvk/grid.hpp"

namespace mvk {

struct Midsurface {
  Rect domain;
  std::function<double(const Vec2&)> theta;
  std::function<Vec2(const Vec2&)> grad;
  std::function<Mat2(const Vec2&)> hess;
};

inline Midsurface make_midsurface(const std::string& name, double amplitude, const Rect& dom) {
  Midsurface ms;
  ms.domain = dom;
  const double a = amplitude;
  if (name == "flat") {
    ms.theta = [](const Vec2&) { return 0.0; };
    ms.grad = [](const Vec2&) { return Vec2::Zero().eval(); };
    ms.hess = [](const Vec2&) { return Mat2::Zero().eval(); };
  } else if (name == "parabolic" || name == "cylinder") {
    // graph of a*x1^2: a developable (cylindrical) surface
    ms.theta = [a](const Vec2& x) { return a * x.x() * x.x(); };
    ms.grad = [a](const Vec2& x) { return Vec2(2.0 * a * x.x(), 0.0); };
    ms.hess = [a](const Vec2&) {
      Mat2 m;
      m << 2.0 * a, 0.0, 0.0, 0.0;
      return m;
    };
  } else if (name == "saddle") {
    ms.theta = [a](const Vec2& x) { return a * x.x() * x.y(); };
    ms.grad = [a](const Vec2& x) { return Vec2(a * x.y(), a * x.x()); };
    ms.hess = [a](const Vec2&) {
      Mat2 m;
      m << 0.0, a, a, 0.0;
      return m;
    };
  } else if (name == "sinusoidal") {
    const double pi = M_PI;
    ms.theta = [a, pi](const Vec2& x) { return a * std::sin(pi * x.x()) * std::sin(pi * x.y()); };
    ms.grad = [a, pi](const Vec2& x) {
      return Vec2(a * pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                  a * pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
    };
    ms.hess = [a, pi](const Vec2& x) {
      const double s1 = std::sin(pi * x.x()), c1 = std::cos(pi * x.x());
      const double s2 = std::sin(pi * x.y()), c2 = std::cos(pi * x.y());
      Mat2 m;
      m << -a * pi * pi * s1 * s2, a * pi * pi * c1 * c2, a * pi * pi * c1 * c2,
          -a * pi * pi * s1 * s2;
      return m;
    };
  } else {
    throw ConfigError("unknown midsurface name: " + name +
                      " (expected flat|parabolic|saddle|sinusoidal|cylinder)");
  }
  return ms;
}

namespace detail {

// Fourth-order-in-the-interior derivative of sampled values along one axis.
template <bool XAxis>
Field2<double> d1_sampled(const Field2<double>& f) {
  const Grid2& g = f.grid;
  Field2<double> out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int n = XAxis ? g.nx : g.ny;
      const int c = XAxis ? i : j;
      const StencilRow r = d1_row(n, c, XAxis ? g.hx : g.hy, /*fourth_order_interior=*/true);
      double s = 0.0;
      for (int t = 0; t < r.len; ++t)
        s += r.w[t] * (XAxis ? f(r.idx[t], j) : f(i, r.idx[t]));
      out(i, j) = s;
    }
  return out;
}

inline double bilinear(const Field2<double>& f, const Vec2& x) {
  const Grid2& g = f.grid;
  double sx = (x.x() - g.dom.x0) / g.hx;
  double sy = (x.y() - g.dom.y0) / g.hy;
  int i = static_cast<int>(std::floor(sx));
  int j = static_cast<int>(std::floor(sy));
  i = std::max(0, std::min(g.nx - 2, i));
  j = std::max(0, std::min(g.ny - 2, j));
  const double tx = sx - i, ty = sy - j;
  return (1 - tx) * (1 - ty) * f(i, j) + tx * (1 - ty) * f(i + 1, j) +
         (1 - tx) * ty * f(i, j + 1) + tx * ty * f(i + 1, j + 1);
}

}  // namespace detail

inline Midsurface make_grid_midsurface(const Field2<double>& samples) {
  Midsurface ms;
  ms.domain = samples.grid.dom;
  auto th = std::make_shared<Field2<double>>(samples);
  auto gx = std::make_shared<Field2<double>>(detail::d1_sampled<true>(samples));
  auto gy = std::make_shared<Field2<double>>(detail::d1_sampled<false>(samples));
  auto hxx = std::make_shared<Field2<double>>(detail::d1_sampled<true>(*gx));
  auto hyy = std::make_shared<Field2<double>>(detail::d1_sampled<false>(*gy));
  auto hxy = std::make_shared<Field2<double>>(detail::d1_sampled<false>(*gx));
  ms.theta = [th](const Vec2& x) { return detail::bilinear(*th, x); };
  ms.grad = [gx, gy](const Vec2& x) {
    return Vec2(detail::bilinear(*gx, x), detail::bilinear(*gy, x));
  };
  ms.hess = [hxx, hyy, hxy](const Vec2& x) {
    const double m01 = detail::bilinear(*hxy, x);
    Mat2 m;
    m << detail::bilinear(*hxx, x), m01, m01, detail::bilinear(*hyy, x);
    return m;
  };
  return ms;
}

}  // namespace mvk

#pragma once
// Uniform tensor-product grids on the parameter domain, and the flat fields
// living on them. The 3D grid stacks equispaced through-thickness layers on
// [-1/2, 1/2]; physical thickness enters only through the geometry maps.

#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "mvk/core.hpp"

namespace mvk {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

template <class V>
V zero_value() {
  if constexpr (std::is_arithmetic_v<V>) {
    return V(0);
  } else {
    return V::Zero();
  }
}

struct Grid2 {
  Rect dom;
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;

  Grid2() = default;
  Grid2(const Rect& d, int nx_, int ny_) : dom(d), nx(nx_), ny(ny_) {
    if (nx < 4 || ny < 4)
      throw ConfigError("Grid2: need nx, ny >= 4 (one-sided stencils span 4 nodes)");
    if (!(dom.x1 > dom.x0) || !(dom.y1 > dom.y0))
      throw ConfigError("Grid2: degenerate domain rectangle");
    hx = dom.width() / (nx - 1);
    hy = dom.height() / (ny - 1);
  }

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double x(int i) const { return dom.x0 + i * hx; }
  double y(int j) const { return dom.y0 + j * hy; }
  Vec2 node(int i, int j) const { return Vec2(x(i), y(j)); }

  bool same_layout(const Grid2& o) const {
    return nx == o.nx && ny == o.ny && dom.x0 == o.dom.x0 && dom.x1 == o.dom.x1 &&
           dom.y0 == o.dom.y0 && dom.y1 == o.dom.y1;
  }
};

struct Grid3 {
  Grid2 plane;
  int nz = 0;
  double hz = 0.0;

  Grid3() = default;
  Grid3(const Grid2& p, int nz_) : plane(p), nz(nz_) {
    // Odd nz keeps the midplane on a node and admits the Simpson thickness rule.
    if (nz < 3 || nz % 2 == 0) throw ConfigError("Grid3: need odd nz >= 3");
    hz = 1.0 / (nz - 1);
  }

  std::size_t size() const { return plane.size() * nz; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * plane.ny + j) * plane.nx + i;
  }
  double x3(int k) const { return -0.5 + k * hz; }
  bool same_layout(const Grid3& o) const { return plane.same_layout(o.plane) && nz == o.nz; }
};

template <class V>
struct Field2 {
  Grid2 grid;
  std::vector<V> data;

  Field2() = default;
  explicit Field2(const Grid2& g) : grid(g), data(g.size(), zero_value<V>()) {}

  V& operator()(int i, int j) { return data[grid.index(i, j)]; }
  const V& operator()(int i, int j) const { return data[grid.index(i, j)]; }
  V& operator[](std::size_t n) { return data[n]; }
  const V& operator[](std::size_t n) const { return data[n]; }
  std::size_t size() const { return data.size(); }
};

template <class V>
struct Field3 {
  Grid3 grid;
  std::vector<V> data;

  Field3() = default;
  explicit Field3(const Grid3& g) : grid(g), data(g.size(), zero_value<V>()) {}

  V& operator()(int i, int j, int k) { return data[grid.index(i, j, k)]; }
  const V& operator()(int i, int j, int k) const { return data[grid.index(i, j, k)]; }
  V& operator[](std::size_t n) { return data[n]; }
  const V& operator[](std::size_t n) const { return data[n]; }
  std::size_t size() const { return data.size(); }
};

// Nodal deformation y(x', x3) of the rescaled slab; components in R^3.
using Deformation3D = Field3<Vec3>;

template <class F>
auto sample2(const Grid2& g, F&& f) {
  using V = std::decay_t<decltype(f(Vec2()))>;
  Field2<V> out(g);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const int i = static_cast<int>(n % g.nx);
      const int j = static_cast<int>(n / g.nx);
      out[n] = f(g.node(i, j));
    }
  });
  return out;
}

template <class F>
auto sample3(const Grid3& g, F&& f) {
  using V = std::decay_t<decltype(f(Vec2(), 0.0))>;
  Field3<V> out(g);
  const std::size_t layer = g.plane.size();
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const int k = static_cast<int>(n / layer);
      const std::size_t r = n % layer;
      const int i = static_cast<int>(r % g.plane.nx);
      const int j = static_cast<int>(r / g.plane.nx);
      out[n] = f(g.plane.node(i, j), g.x3(k));
    }
  });
  return out;
}

}  // namespace mvk

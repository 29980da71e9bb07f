#pragma once
// One-dimensional finite-difference rows shared by the discrete calculus:
// second-order central differences in the interior, second-order one-sided
// rows at the two ends, and optional fourth-order interior rows (used for
// grid-sampled midsurfaces). Every row is exact on quadratics along its axis,
// which the gauge and roundtrip identities rely on.

#include "mvk/core.hpp"

namespace mvk {

struct StencilRow {
  int idx[5];
  double w[5];
  int len = 0;
};

// d/ds at node i of n equispaced samples, spacing hs.
inline StencilRow d1_row(int n, int i, double hs, bool fourth_order_interior = false) {
  StencilRow r;
  const double inv = 1.0 / hs;
  if (i == 0) {
    r.len = 3;
    r.idx[0] = 0; r.idx[1] = 1; r.idx[2] = 2;
    r.w[0] = -1.5 * inv; r.w[1] = 2.0 * inv; r.w[2] = -0.5 * inv;
  } else if (i == n - 1) {
    r.len = 3;
    r.idx[0] = n - 1; r.idx[1] = n - 2; r.idx[2] = n - 3;
    r.w[0] = 1.5 * inv; r.w[1] = -2.0 * inv; r.w[2] = 0.5 * inv;
  } else if (fourth_order_interior && i >= 2 && i <= n - 3) {
    r.len = 4;
    r.idx[0] = i - 2; r.idx[1] = i - 1; r.idx[2] = i + 1; r.idx[3] = i + 2;
    r.w[0] = inv / 12.0; r.w[1] = -8.0 * inv / 12.0;
    r.w[2] = 8.0 * inv / 12.0; r.w[3] = -inv / 12.0;
  } else {
    r.len = 2;
    r.idx[0] = i - 1; r.idx[1] = i + 1;
    r.w[0] = -0.5 * inv; r.w[1] = 0.5 * inv;
  }
  return r;
}

// d^2/ds^2 at node i; one-sided 4-point rows at the ends (still second order).
inline StencilRow d2_row(int n, int i, double hs) {
  StencilRow r;
  const double inv2 = 1.0 / (hs * hs);
  if (i == 0) {
    r.len = 4;
    r.idx[0] = 0; r.idx[1] = 1; r.idx[2] = 2; r.idx[3] = 3;
    r.w[0] = 2.0 * inv2; r.w[1] = -5.0 * inv2; r.w[2] = 4.0 * inv2; r.w[3] = -1.0 * inv2;
  } else if (i == n - 1) {
    r.len = 4;
    r.idx[0] = n - 1; r.idx[1] = n - 2; r.idx[2] = n - 3; r.idx[3] = n - 4;
    r.w[0] = 2.0 * inv2; r.w[1] = -5.0 * inv2; r.w[2] = 4.0 * inv2; r.w[3] = -1.0 * inv2;
  } else {
    r.len = 3;
    r.idx[0] = i - 1; r.idx[1] = i; r.idx[2] = i + 1;
    r.w[0] = inv2; r.w[1] = -2.0 * inv2; r.w[2] = inv2;
  }
  return r;
}

}  // namespace mvk

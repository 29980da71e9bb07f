#pragma once
// First-order minimization with gauge fixing, for both the 2D limit
// functionals and the normalized 3D shell energy.
//
// The solver is plain backtracking descent (sufficient decrease), with an
// optional limited-memory quasi-Newton accelerator; both satisfy the same
// contracts. The line search accepts on the energy of the gauge-projected
// trial point, so accepted energies are non-increasing by construction even
// when a projection nudges the value. There is no randomness anywhere and
// all reductions inside the solver run serially in node order, so iterate
// sequences are bit-identical across thread counts.
//
// Gauge fixing removes the null directions the functionals cannot see:
//   2D -- mean and mean slope of v (through the strain-preserving change of
//         variables, so the membrane energy is untouched), then the mean
//         in-plane rotation and mean of u;
//   3D -- mean displacement and the best-fit infinitesimal rotation about
//         the undeformed shell.
//
// The 3D problem is parametrized by displacement increments scaled with the
// regime's in-plane/out-of-plane amplitudes; that whitens the otherwise
// extreme imbalance between membrane and bending stiffness after the 1/Eh
// normalization and makes quasi-Newton steps effective.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include "mvk/csv.hpp"
#include "mvk/limit_energy.hpp"
#include "mvk/recovery.hpp"
#include "mvk/shell3d.hpp"

namespace mvk {

struct SolveOptions {
  int max_iters = 2000;
  double grad_tol = 1e-8;    // stationarity threshold, max-norm of the gradient
  double step0 = 1.0;        // initial trial step
  double shrink = 0.5;       // backtracking factor, in (0,1)
  double c1 = 1e-4;          // sufficient-decrease constant
  std::string method = "gd";  // "gd" or "lbfgs"
  int lbfgs_memory = 8;
  std::uint64_t seed = 0;    // reserved for randomized variants; unused here
  std::string dump_path;     // where to drop the iterate if descent diverges

  void validate() const {
    if (!(grad_tol > 0.0)) throw ConfigError("solver: grad_tol must be positive");
    if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("solver: shrink must be in (0,1)");
    if (!(step0 > 0.0)) throw ConfigError("solver: step0 must be positive");
    if (!(c1 > 0.0 && c1 < 1.0)) throw ConfigError("solver: c1 must be in (0,1)");
    if (max_iters < 0) throw ConfigError("solver: max_iters must be >= 0");
    if (method != "gd" && method != "lbfgs")
      throw ConfigError("solver: method must be gd or lbfgs, got '" + method + "'");
    if (lbfgs_memory < 1) throw ConfigError("solver: lbfgs_memory must be >= 1");
  }
};

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

namespace detail {

inline double dot_serial(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline bool all_finite(const std::vector<double>& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

struct FlatResult {
  std::vector<double> x;
  double energy = 0.0;
  int iterations = 0;
  std::string stop_reason;
  std::vector<IterationRecord> trace;
};

struct LbfgsMemory {
  std::deque<std::vector<double>> s, y;
  std::deque<double> rho;

  void push(std::vector<double> sk, std::vector<double> yk, int cap) {
    const double sy = dot_serial(sk, yk);
    const double ss = dot_serial(sk, sk), yy = dot_serial(yk, yk);
    if (!(sy > 1e-10 * std::sqrt(ss * yy))) return;  // curvature too weak to use
    s.push_back(std::move(sk));
    y.push_back(std::move(yk));
    rho.push_back(1.0 / sy);
    while (static_cast<int>(s.size()) > cap) {
      s.pop_front();
      y.pop_front();
      rho.pop_front();
    }
  }

  // Two-loop recursion; scales the seed matrix by the latest curvature pair.
  std::vector<double> direction(const std::vector<double>& g) const {
    std::vector<double> q = g;
    const std::size_t m = s.size();
    std::vector<double> alpha(m);
    for (std::size_t ii = m; ii-- > 0;) {
      alpha[ii] = rho[ii] * dot_serial(s[ii], q);
      for (std::size_t n = 0; n < q.size(); ++n) q[n] -= alpha[ii] * y[ii][n];
    }
    if (m > 0) {
      const double gamma = dot_serial(s[m - 1], y[m - 1]) / dot_serial(y[m - 1], y[m - 1]);
      for (double& v : q) v *= gamma;
    }
    for (std::size_t ii = 0; ii < m; ++ii) {
      const double beta = rho[ii] * dot_serial(y[ii], q);
      for (std::size_t n = 0; n < q.size(); ++n) q[n] += (alpha[ii] - beta) * s[ii][n];
    }
    for (double& v : q) v = -v;
    return q;
  }
};

template <class EnergyFn, class GradFn, class ProjectFn, class DumpFn>
FlatResult descent(std::vector<double> x, EnergyFn&& energy, GradFn&& gradient,
                   ProjectFn&& project, DumpFn&& dump, const SolveOptions& opts) {
  opts.validate();
  FlatResult res;
  double e = energy(x);
  if (!std::isfinite(e)) {
    dump(x);
    throw NumericalError("descent: energy is not finite at the starting point");
  }

  const bool lbfgs = (opts.method == "lbfgs");
  LbfgsMemory mem;
  std::vector<double> prev_x, prev_g;
  double carry_step = opts.step0;
  double last_step = 0.0;
  int accepted = 0;
  res.stop_reason = "max-iterations";

  for (int it = 0; it <= opts.max_iters; ++it) {
    std::vector<double> g = gradient(x);
    if (!all_finite(g)) {
      dump(x);
      throw NumericalError("descent: gradient is not finite at iteration " + std::to_string(it));
    }
    if (lbfgs && !prev_x.empty()) {
      std::vector<double> sk(x.size()), yk(x.size());
      for (std::size_t n = 0; n < x.size(); ++n) {
        sk[n] = x[n] - prev_x[n];
        yk[n] = g[n] - prev_g[n];
      }
      mem.push(std::move(sk), std::move(yk), opts.lbfgs_memory);
    }
    const double gnorm = max_abs(g);
    res.trace.push_back({it, e, gnorm, last_step});
    if (gnorm <= opts.grad_tol) {
      res.stop_reason = "gradient-tolerance";
      break;
    }
    if (it == opts.max_iters) break;  // budget spent; the trace has the final state

    std::vector<double> dir;
    double dd;  // directional derivative along dir
    if (lbfgs) {
      dir = mem.direction(g);
      dd = dot_serial(g, dir);
      if (!(dd < 0.0)) {  // not a descent direction; drop history and restart steepest
        mem = LbfgsMemory{};
        dir = g;
        for (double& v : dir) v = -v;
        dd = -dot_serial(g, g);
      }
    } else {
      dir = g;
      for (double& v : dir) v = -v;
      dd = -dot_serial(g, g);
    }

    double s = lbfgs ? (mem.s.empty() ? std::min(opts.step0, 1.0 / std::max(gnorm, 1e-30))
                                      : 1.0)
                     : carry_step;
    bool found = false;
    std::vector<double> xt(x.size());
    double et = 0.0;
    const double s_floor = 1e-20 * std::max(s, 1.0);
    while (s > s_floor) {
      for (std::size_t n = 0; n < x.size(); ++n) xt[n] = x[n] + s * dir[n];
      project(xt);
      et = energy(xt);
      if (std::isfinite(et) && et <= e + opts.c1 * s * dd) {
        found = true;
        break;
      }
      s *= opts.shrink;
    }
    if (!found) {
      res.stop_reason = "line-search-floor";
      break;
    }
    if (lbfgs) {
      prev_x = x;
      prev_g = std::move(g);
    }
    x.swap(xt);
    e = et;
    last_step = s;
    ++accepted;
    if (!lbfgs) carry_step = std::min(s * 2.0, opts.step0 * 1e12);
  }

  res.x = std::move(x);
  res.energy = e;
  res.iterations = accepted;
  return res;
}

inline void dump_flat(const std::string& path, const std::vector<double>& x) {
  if (path.empty()) return;
  std::string s = "index,value\n";
  for (std::size_t n = 0; n < x.size(); ++n)
    s += std::to_string(n) + "," + format_number(x[n]) + "\n";
  write_text_file(path, s);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// 2D: the limit functional with optional transverse load.

// Renormalizes a displacement pair into the gauge slice: zero mean slope and
// mean of v (compensated in u so the membrane energy is unchanged), then zero
// mean in-plane rotation and mean of u. Idempotent up to roundoff.
inline Displacement2D project_displacement2(Displacement2D d, const Midsurface& ms,
                                            const Regime& regime) {
  detail::check_same_grid(d);
  const Grid2& g = d.v.grid;
  const double area = g.dom.area();
  const Vec2 xc(0.5 * (g.dom.x0 + g.dom.x1), 0.5 * (g.dom.y0 + g.dom.y1));

  const Field2<Vec2> gv = grad2(d.v);
  Field2<double> comp(g);
  for (std::size_t n = 0; n < g.size(); ++n) comp[n] = gv[n].x();
  const double ax = integrate2(comp) / area;
  for (std::size_t n = 0; n < g.size(); ++n) comp[n] = gv[n].y();
  const double ay = integrate2(comp) / area;
  const Vec2 a(ax, ay);
  const double b = integrate2(d.v) / area - a.dot(xc);

  if (regime.kind == RegimeKind::MvK) {
    d = gauge_transform(d, ms, a, b);
  } else {
    // The linearized strain couples grad v only to grad theta, so the
    // compensation for tilting v is theta*a alone.
    const Field2<double> th = detail::sample_theta(ms, g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        d.u(i, j) += th(i, j) * a;
        d.v(i, j) -= a.dot(g.node(i, j)) + b;
      }
  }

  const Field2<Mat2> du = grad2_vec(d.u);
  for (std::size_t n = 0; n < g.size(); ++n) comp[n] = du[n](0, 1) - du[n](1, 0);
  const double rot = 0.5 * integrate2(comp) / area;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 r = g.node(i, j) - xc;
      d.u(i, j) -= rot * Vec2(r.y(), -r.x());
    }

  Field2<double> comp2(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    comp[n] = d.u[n].x();
    comp2[n] = d.u[n].y();
  }
  const Vec2 umean(integrate2(comp) / area, integrate2(comp2) / area);
  for (std::size_t n = 0; n < g.size(); ++n) d.u[n] -= umean;
  return d;
}

struct Minimize2DResult {
  Displacement2D d;
  double energy = 0.0;
  int iterations = 0;
  std::string stop_reason;
  std::vector<IterationRecord> trace;
};

namespace detail {

inline std::vector<double> flatten2(const Displacement2D& d) {
  const std::size_t n = d.v.size();
  std::vector<double> x(3 * n);
  for (std::size_t p = 0; p < n; ++p) {
    x[2 * p] = d.u[p].x();
    x[2 * p + 1] = d.u[p].y();
    x[2 * n + p] = d.v[p];
  }
  return x;
}

inline Displacement2D unflatten2(const std::vector<double>& x, const Grid2& g) {
  Displacement2D d(g);
  const std::size_t n = d.v.size();
  for (std::size_t p = 0; p < n; ++p) {
    d.u[p] = Vec2(x[2 * p], x[2 * p + 1]);
    d.v[p] = x[2 * n + p];
  }
  return d;
}

}  // namespace detail

inline Minimize2DResult minimize_limit(const Displacement2D& d0, const Midsurface& ms,
                                       const Material& mat, const Regime& regime,
                                       const Field2<double>* f3bar, const SolveOptions& opts,
                                       double r33 = 1.0) {
  detail::check_same_grid(d0);
  const Grid2& g = d0.v.grid;
  if (f3bar) {
    if (!f3bar->grid.same_layout(g)) throw ConfigError("minimize_limit: load grid mismatch");
    require_zero_mean(*f3bar);
  }

  auto energy = [&](const std::vector<double>& x) {
    const Displacement2D d = detail::unflatten2(x, g);
    const EnergyBreakdown b = limit_energy_breakdown(d, ms, mat, regime);
    const double force = f3bar ? r33 * integrate2_product(d.v, *f3bar) : 0.0;
    return b.membrane + b.bending - force;
  };
  auto gradient = [&](const std::vector<double>& x) {
    return detail::flatten2(
        limit_gradient(detail::unflatten2(x, g), ms, mat, regime, f3bar, r33));
  };
  auto project = [&](std::vector<double>& x) {
    x = detail::flatten2(project_displacement2(detail::unflatten2(x, g), ms, regime));
  };
  auto dump = [&](const std::vector<double>& x) { detail::dump_flat(opts.dump_path, x); };

  detail::FlatResult r = detail::descent(detail::flatten2(d0), energy, gradient, project, dump, opts);
  Minimize2DResult out;
  out.d = detail::unflatten2(r.x, g);
  out.energy = r.energy;
  out.iterations = r.iterations;
  out.stop_reason = std::move(r.stop_reason);
  out.trace = std::move(r.trace);
  return out;
}

// ---------------------------------------------------------------------------
// 3D: the normalized loaded shell energy (1/Eh) * Jh.

struct Minimize3DResult {
  Deformation3D y;
  double energy = 0.0;  // (1/Eh) * Jh at the final iterate
  int iterations = 0;
  std::string stop_reason;
  std::vector<IterationRecord> trace;
};

// Removes the mean displacement and the best-fit infinitesimal rotation
// relative to the undeformed shell. Idempotent up to roundoff.
inline Deformation3D project_deformation3(Deformation3D y, const Deformation3D& reference) {
  const std::size_t n = y.size();
  Vec3 ref_mean = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) ref_mean += reference[i];
  ref_mean /= static_cast<double>(n);

  Vec3 c = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) c += y[i] - reference[i];
  c /= static_cast<double>(n);

  Mat3 m = Mat3::Zero();
  Vec3 r = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 q = reference[i] - ref_mean;
    m += q.squaredNorm() * Mat3::Identity() - q * q.transpose();
    r += q.cross(y[i] - reference[i] - c);
  }
  Vec3 omega = Vec3::Zero();
  if (std::abs(m.determinant()) > 1e-300) omega = m.ldlt().solve(r);

  for (std::size_t i = 0; i < n; ++i)
    y[i] -= c + omega.cross(reference[i] - ref_mean);
  return y;
}

inline Minimize3DResult minimize_shell3d(const Deformation3D& y0, const ShellGeometry& geo,
                                         const Material& mat, const ForceProfile& fp,
                                         const Regime& regime, const SolveOptions& opts) {
  const Grid3& g3 = y0.grid;
  const PulledBackForce pbf = force_pullback(fp, geo.h, regime);
  if (!pbf.f3.grid.same_layout(g3.plane))
    throw ConfigError("minimize_shell3d: load grid must match the slab's in-plane grid");
  const ShellQuadrature quad(g3, geo);
  const Deformation3D id = identity_deformation(g3, geo);
  const double align = load_alignment_vector(quad, geo, pbf).norm();
  const double inv_eh = 1.0 / pbf.Eh;
  const double su = regime.u_scale(geo.h), sv = regime.v_scale(geo.h);
  const Vec3 sigma(su, su, sv);
  const std::size_t n = g3.size(), plane_size = g3.plane.size();

  auto to_flat = [&](const Deformation3D& y) {
    std::vector<double> x(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 dlt = y[i] - id[i];
      x[3 * i] = dlt.x() / sigma.x();
      x[3 * i + 1] = dlt.y() / sigma.y();
      x[3 * i + 2] = dlt.z() / sigma.z();
    }
    return x;
  };
  auto from_flat = [&](const std::vector<double>& x) {
    Deformation3D y(g3);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = id[i] + Vec3(sigma.x() * x[3 * i], sigma.y() * x[3 * i + 1],
                          sigma.z() * x[3 * i + 2]);
    return y;
  };

  auto energy = [&](const std::vector<double>& x) {
    const Deformation3D y = from_flat(x);
    const double ih = energy_Ih(y, quad, mat);
    std::vector<double> buf(n);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        buf[i] = quad.w[i] * quad.det[i] * pbf.f3h(i % plane_size) * y[i].z();
    });
    return inv_eh * (ih - pairwise_sum(buf) + align);
  };
  auto gradient = [&](const std::vector<double>& x) {
    const Field3<Vec3> gy = energy_Jh_gradient(from_flat(x), quad, mat, pbf);
    std::vector<double> g(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
      g[3 * i] = inv_eh * sigma.x() * gy[i].x();
      g[3 * i + 1] = inv_eh * sigma.y() * gy[i].y();
      g[3 * i + 2] = inv_eh * sigma.z() * gy[i].z();
    }
    return g;
  };
  auto project = [&](std::vector<double>& x) {
    x = to_flat(project_deformation3(from_flat(x), id));
  };
  auto dump = [&](const std::vector<double>& x) { detail::dump_flat(opts.dump_path, x); };

  detail::FlatResult r = detail::descent(to_flat(y0), energy, gradient, project, dump, opts);
  Minimize3DResult out;
  out.y = from_flat(r.x);
  out.energy = r.energy;
  out.iterations = r.iterations;
  out.stop_reason = std::move(r.stop_reason);
  out.trace = std::move(r.trace);
  return out;
}

}  // namespace mvk

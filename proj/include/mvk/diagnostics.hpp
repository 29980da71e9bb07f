#pragma once
// Empirical probe of geometric rigidity on the reference slab: how far a
// deformation gradient field is from the single best rotation, compared with
// its pointwise distance to the rotation group. The quotient is the constant
// a rigidity estimate would need on this domain; nothing closed-form exists
// to compare against, so the probe *is* the measurement. Deformations are
// random rigid motions composed with small smooth perturbations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Geometry>

#include "mvk/calculus.hpp"
#include "mvk/polar.hpp"

namespace mvk {

struct RigiditySample {
  int index = 0;
  double epsilon = 0.0;    // perturbation amplitude (0 for the exact rigid row)
  double defect = 0.0;     // || dist(grad v, SO(3)) ||_L2
  double best_fit = 0.0;   // || grad v - R ||_L2, R from the mean gradient
  double ratio = 0.0;      // best_fit / defect; NaN when the defect vanishes
  bool applicable = true;  // false for (numerically) exact rigid motions
};

struct RigidityReport {
  std::vector<RigiditySample> samples;
  double max_ratio = 0.0;  // over applicable samples: the empirical constant
};

namespace detail {

inline Mat3 random_rotation(Rng& rng) {
  Vec3 axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
  while (axis.norm() < 1e-8) axis = Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
  axis.normalize();
  const double angle = rng.uniform(0.0, 3.141592653589793);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline Mat3 random_antisymmetric(Rng& rng) {
  Mat3 a = Mat3::Zero();
  a(0, 1) = rng.gaussian();
  a(0, 2) = rng.gaussian();
  a(1, 2) = rng.gaussian();
  a(1, 0) = -a(0, 1);
  a(2, 0) = -a(0, 2);
  a(2, 1) = -a(1, 2);
  const double nrm = a.norm();
  if (nrm > 1e-8) a /= nrm;
  return a;
}

// One smooth trig bump per component; low integer frequencies keep the field
// resolved on coarse probe grids.
struct TrigField {
  Vec3 amp;
  double k[3][3];  // [component][coordinate] frequencies
  double p[3][3];  // phases

  static TrigField random(Rng& rng) {
    TrigField f;
    f.amp = Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) {
        f.k[c][d] = 1.0 + std::floor(rng.uniform(0.0, 2.0));
        f.p[c][d] = rng.uniform(0.0, 2.0);
      }
    return f;
  }

  Vec3 eval(const Vec3& x) const {
    constexpr double pi = 3.141592653589793;
    Vec3 out;
    for (int c = 0; c < 3; ++c) {
      double v = amp[c];
      for (int d = 0; d < 3; ++d) v *= std::sin(pi * (k[c][d] * x[d] + p[c][d]));
      out[c] = v;
    }
    return out;
  }
};

}  // namespace detail

// Measures one deformation: gradient field, best single rotation from the
// mean gradient, and the two L2 norms of the quotient.
inline RigiditySample rigidity_measure(const Deformation3D& y) {
  const Grid3& g = y.grid;
  const Field3<Mat3> grad = grad3_scaled(y, 1.0);  // plain gradient: unit slab scale
  const Field3<double> w = weights3(g);

  std::vector<double> vol_buf(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) vol_buf[n] = w[n];
  const double volume = pairwise_sum(vol_buf);

  Mat3 mean = Mat3::Zero();
  for (std::size_t n = 0; n < g.size(); ++n) mean += w[n] * grad[n];
  mean /= volume;
  const Mat3 r = nearest_rotation(mean);

  std::vector<double> defect_buf(g.size()), fit_buf(g.size()), size_buf(g.size());
  parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) {
      const double d = dist_SO3(grad[n]);
      defect_buf[n] = w[n] * d * d;
      fit_buf[n] = w[n] * (grad[n] - r).squaredNorm();
      size_buf[n] = w[n] * grad[n].squaredNorm();
    }
  });

  RigiditySample s;
  s.defect = std::sqrt(pairwise_sum(defect_buf));
  s.best_fit = std::sqrt(pairwise_sum(fit_buf));
  const double scale = std::sqrt(pairwise_sum(size_buf));
  if (s.defect > 1e-12 * std::max(1.0, scale)) {
    s.ratio = s.best_fit / s.defect;
  } else {
    s.applicable = false;
    s.ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

// Random sweep. Sample 0 is an exact rigid motion (reported not-applicable),
// sample 1 a constant antisymmetric-gradient perturbation (quotient 1 up to
// roundoff, since the gradient is spatially constant), the rest are rigid
// motions plus smooth trig perturbations with log-uniform amplitudes.
inline RigidityReport rigidity_probe(const Grid3& g, int nsamples, std::uint64_t seed) {
  if (nsamples < 1) throw ConfigError("rigidity_probe: need at least one sample");
  Rng rng(seed);
  RigidityReport report;
  report.samples.reserve(static_cast<std::size_t>(nsamples));

  for (int s = 0; s < nsamples; ++s) {
    const Mat3 r0 = detail::random_rotation(rng);
    const Vec3 c(0.1 * rng.gaussian(), 0.1 * rng.gaussian(), 0.1 * rng.gaussian());
    double eps = 0.0;
    Deformation3D y(g);
    if (s == 0) {
      y = sample3(g, [&](const Vec2& xp, double x3) -> Vec3 {
        return r0 * Vec3(xp.x(), xp.y(), x3) + c;
      });
    } else if (s == 1) {
      eps = 1e-3;
      const Mat3 a = detail::random_antisymmetric(rng);
      y = sample3(g, [&](const Vec2& xp, double x3) -> Vec3 {
        const Vec3 x(xp.x(), xp.y(), x3);
        return r0 * (x + eps * (a * x)) + c;
      });
    } else {
      eps = std::pow(10.0, rng.uniform(-4.0, -1.0));
      const detail::TrigField phi = detail::TrigField::random(rng);
      y = sample3(g, [&](const Vec2& xp, double x3) -> Vec3 {
        const Vec3 x(xp.x(), xp.y(), x3);
        return r0 * (x + eps * phi.eval(x)) + c;
      });
    }
    RigiditySample sample = rigidity_measure(y);
    sample.index = s;
    sample.epsilon = eps;
    report.samples.push_back(sample);
    if (sample.applicable) report.max_ratio = std::max(report.max_ratio, sample.ratio);
  }
  return report;
}

}  // namespace mvk

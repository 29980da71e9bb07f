#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mvk/limit_energy.hpp"

using namespace mvk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = 3.141592653589793;
const Rect kDom{0.0, 1.0, 0.0, 1.0};
const Material kStvk(MaterialKind::StVenantKirchhoff, 1.0, 1.0);

Displacement2D random_displacement(const Grid2& g, Rng& rng, double scale) {
  Displacement2D d(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    d.u[n] = scale * Vec2(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    d.v[n] = scale * rng.uniform(-1.0, 1.0);
  }
  return d;
}

}  // namespace

TEST_CASE("hand-quadrature value for the parabolic plate deflection", "[limit-energy]") {
  // flat sheet, u = 0, v = x1^2/2, lambda = mu = 1: membrane 1/15, bending 1/9,
  // total 8/45; the bending integrand is constant, so only the membrane part
  // carries quadrature error
  const Grid2 g(kDom, 64, 64);
  const Midsurface flat = make_midsurface("flat", 0.0, kDom);
  Displacement2D d(g);
  d.v = sample2(g, [](const Vec2& x) { return 0.5 * x.x() * x.x(); });

  const EnergyBreakdown b = limit_energy_breakdown(d, flat, kStvk, Regime::mvk());
  REQUIRE_THAT(b.bending, WithinAbs(1.0 / 9.0, 1e-12));
  REQUIRE_THAT(b.membrane, WithinAbs(1.0 / 15.0, 1e-4));
  REQUIRE_THAT(b.total(), WithinAbs(8.0 / 45.0, 1e-4));
  REQUIRE(b.force == 0.0);
  REQUIRE(b.penalty == 0.0);
  REQUIRE_THAT(I_limit(d, flat, kStvk, Regime::mvk()), WithinRel(b.total(), 1e-14));
}

TEST_CASE("membrane strain differs between regimes by the quadratic slope term",
          "[limit-energy]") {
  const Grid2 g(kDom, 16, 16);
  const Midsurface ms = make_midsurface("sinusoidal", 0.8, kDom);
  Rng rng(21);
  const Displacement2D d = random_displacement(g, rng, 0.3);

  const Field2<Mat2> em = membrane_strain(d, ms, Regime::mvk());
  const Field2<Mat2> el = membrane_strain(d, ms, Regime::linearized(6.0));
  const Field2<Vec2> gv = grad2(d.v);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Mat2 quad = 0.5 * gv[n] * gv[n].transpose();
    REQUIRE(((em[n] - el[n]) - quad).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("linearized functional is exactly quadratic under scaling", "[limit-energy]") {
  const Grid2 g(kDom, 14, 14);
  const Midsurface ms = make_midsurface("sinusoidal", 0.6, kDom);
  Rng rng(22);
  Displacement2D d = random_displacement(g, rng, 0.4);
  const Regime lin = Regime::linearized(5.0);
  const double base = I_limit(d, ms, kStvk, lin);
  for (const double t : {2.0, 0.5, -3.0}) {
    Displacement2D s(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
      s.u[n] = t * d.u[n];
      s.v[n] = t * d.v[n];
    }
    REQUIRE_THAT(I_limit(s, ms, kStvk, lin), WithinRel(t * t * base, 1e-12));
  }
}

TEST_CASE("tilt-and-shift reparametrization leaves the energy unchanged", "[limit-energy]") {
  const Grid2 g(kDom, 16, 16);
  const Midsurface ms = make_midsurface("sinusoidal", 1.0, kDom);
  const Regime reg = Regime::mvk();
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    // nodewise-random data: the invariance is a discrete identity, not an
    // asymptotic statement, so it must hold for rough fields too
    const Displacement2D d = random_displacement(g, rng, 0.5);
    const Vec2 a(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const double b = rng.uniform(-1.0, 1.0);
    const double before = I_limit(d, ms, kStvk, reg);
    const double after = I_limit(gauge_transform(d, ms, a, b), ms, kStvk, reg);
    REQUIRE_THAT(after, WithinRel(before, 1e-12));
  }
}

TEST_CASE("strain compatibility residual vanishes for gradient-generated strains",
          "[limit-energy]") {
  SECTION("quadratic strains give the exact constant residual") {
    // e = diag(x2^2, x1^2) has residual d22 e00 + d11 e11 - 2 d12 e01 = 4
    // everywhere, and the stencils are exact on quadratics
    const Grid2 g(kDom, 12, 12);
    Field2<Mat2> e(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const Vec2 x = g.node(i, j);
        e(i, j) << x.y() * x.y(), 0.0, 0.0, x.x() * x.x();
      }
    const Field2<double> res = compatibility_residual(e);
    for (std::size_t n = 0; n < g.size(); ++n) REQUIRE_THAT(res[n], WithinAbs(4.0, 1e-10));
  }
  SECTION("symmetrized gradients are compatible at second order in the interior") {
    auto interior_max = [](int n) {
      const Grid2 g(kDom, n, n);
      const Field2<Vec2> u = sample2(g, [](const Vec2& x) {
        return Vec2(std::sin(kPi * x.x()) * std::sin(2 * kPi * x.y()),
                    std::cos(kPi * x.x()) * x.y() * x.y() * x.x());
      });
      const Field2<Mat2> du = grad2_vec(u);
      Field2<Mat2> e(g);
      for (std::size_t p = 0; p < g.size(); ++p) e[p] = 0.5 * (du[p] + du[p].transpose());
      const Field2<double> res = compatibility_residual(e);
      double worst = 0.0;
      for (int j = 2; j < g.ny - 2; ++j)
        for (int i = 2; i < g.nx - 2; ++i) worst = std::max(worst, std::abs(res(i, j)));
      return worst;
    };
    REQUIRE(observed_order(interior_max(33), interior_max(65), 2.0) > 1.9);
  }
}

TEST_CASE("curvature-change residual reproduces hand values on flat sheets",
          "[limit-energy]") {
  const Grid2 g(kDom, 16, 16);
  const Midsurface flat = make_midsurface("flat", 0.0, kDom);

  const Field2<double> saddle = sample2(g, [](const Vec2& x) { return x.x() * x.y(); });
  const Field2<double> res = gauss_residual(saddle, flat);
  for (std::size_t n = 0; n < g.size(); ++n) REQUIRE_THAT(res[n], WithinAbs(-1.0, 1e-12));

  const Field2<double> zero(g);
  const Field2<double> res0 = gauss_residual(zero, flat);
  for (std::size_t n = 0; n < g.size(); ++n) REQUIRE_THAT(res0[n], WithinAbs(0.0, 1e-14));

  const Field2<double> bowl =
      sample2(g, [](const Vec2& x) { return 0.5 * (x.x() * x.x() + x.y() * x.y()); });
  const Field2<double> res1 = gauss_residual(bowl, flat);
  for (std::size_t n = 0; n < g.size(); ++n) REQUIRE_THAT(res1[n], WithinAbs(1.0, 1e-11));
}

TEST_CASE("limit gradient agrees with finite differences of the functional",
          "[limit-energy]") {
  const Grid2 g(kDom, 12, 12);
  const Midsurface ms = make_midsurface("sinusoidal", 0.7, kDom);
  const Material mat(MaterialKind::StVenantKirchhoff, 1.2, 0.9);
  Field2<double> f3 = sample2(g, [](const Vec2& x) {
    return std::sin(2 * kPi * x.x()) * std::sin(2 * kPi * x.y());
  });
  Rng rng(24);
  for (const Regime& reg : {Regime::mvk(), Regime::linearized(6.0)}) {
    Displacement2D d = random_displacement(g, rng, 0.05);
    const Displacement2D grad = limit_gradient(d, ms, mat, reg, &f3);
    const double step = 1e-6;
    double max_diff = 0.0, max_grad = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p)
      for (int comp = 0; comp < 3; ++comp) {
        Displacement2D dp = d, dm = d;
        double& xp = comp < 2 ? dp.u[p][comp] : dp.v[p];
        double& xm = comp < 2 ? dm.u[p][comp] : dm.v[p];
        xp += step;
        xm -= step;
        const double fd = (J0(dp, ms, mat, reg, f3) - J0(dm, ms, mat, reg, f3)) / (2 * step);
        const double an = comp < 2 ? grad.u[p][comp] : grad.v[p];
        max_diff = std::max(max_diff, std::abs(fd - an));
        max_grad = std::max(max_grad, std::abs(an));
      }
    REQUIRE(max_diff <= 1e-6 * max_grad);
  }
}

TEST_CASE("loaded functional insists on balanced transverse loads", "[limit-energy]") {
  const Grid2 g(kDom, 10, 10);
  const Midsurface flat = make_midsurface("flat", 0.0, kDom);
  Displacement2D d(g);
  Field2<double> biased(g);
  for (std::size_t n = 0; n < g.size(); ++n) biased[n] = 1.0;
  REQUIRE_THROWS_AS(J0(d, flat, kStvk, Regime::mvk(), biased), NumericalError);
}

TEST_CASE("displacement distance is a weighted L2 norm of the difference",
          "[limit-energy]") {
  const Grid2 g(kDom, 11, 11);
  Displacement2D a(g), b(g);
  REQUIRE(displacement_l2_distance(a, b) == 0.0);

  for (std::size_t n = 0; n < g.size(); ++n) b.u[n] = Vec2(0.3, -0.4);
  REQUIRE_THAT(displacement_l2_distance(a, b), WithinRel(0.5, 1e-13));  // sqrt(0.09+0.16)

  const Grid2 other(kDom, 12, 11);
  Displacement2D c(other);
  REQUIRE_THROWS_AS(displacement_l2_distance(a, c), ConfigError);
}

TEST_CASE("loaded functional separates action and penalty channels", "[limit-energy]") {
  const Grid2 g(kDom, 12, 12);
  const Midsurface flat = make_midsurface("flat", 0.0, kDom);
  Displacement2D d(g);
  d.v = sample2(g, [](const Vec2& x) { return std::sin(2 * kPi * x.x()); });
  Field2<double> f3 = sample2(g, [](const Vec2& x) {
    return std::sin(2 * kPi * x.x()) * std::sin(2 * kPi * x.y());
  });
  const double mean = integrate2(f3) / g.dom.area();
  for (std::size_t n = 0; n < g.size(); ++n) f3[n] -= mean;

  const double plain = J0(d, flat, kStvk, Regime::mvk(), f3);
  const double work = integrate2_product(d.v, f3);
  const double unloaded = I_limit(d, flat, kStvk, Regime::mvk());
  REQUIRE_THAT(plain, WithinRel(unloaded - work, 1e-13));

  // r33 rescales the action, gval shifts the total verbatim
  const double scaled = J0(d, flat, kStvk, Regime::mvk(), f3, 0.5, 0.125);
  REQUIRE_THAT(scaled, WithinRel(unloaded - 0.5 * work + 0.125, 1e-13));
}

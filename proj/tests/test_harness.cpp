// Tests for the configuration layer, CSV formatting, and study drivers:
// parsing and validation errors, canonical echo round-trip, and the
// deterministic report content produced by the table/study entry points.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mvk/config.hpp"
#include "mvk/core.hpp"
#include "mvk/csv.hpp"
#include "mvk/diagnostics.hpp"
#include "mvk/study.hpp"

using namespace mvk;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      out.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (start < text.size()) out.push_back(text.substr(start));
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("config text parses keys, comments, and fractions") {
  const std::string text =
      "# leading comment\n"
      "study.kind = recovery   # trailing comment\n"
      "\n"
      "grid.nx2d=24\n"
      "  study.h_list = 1/10, 1/20  \n"
      "solver.grad_tol = 1e-9\n"
      "study.seed = 42\n";
  ConfigMap m = ConfigMap::from_string(text);
  CHECK(m.get_string("study.kind", "?") == "recovery");
  CHECK(m.get_int("grid.nx2d", 0) == 24);
  CHECK(m.get_double("solver.grad_tol", 0.0) == 1e-9);
  CHECK(m.get_uint64("study.seed", 0) == 42u);
  const std::vector<double> hs = m.get_list("study.h_list", {});
  REQUIRE(hs.size() == 2);
  CHECK(hs[0] == 0.1);
  CHECK(hs[1] == 0.05);
  // Fractions also work through the scalar accessor.
  ConfigMap f = ConfigMap::from_string("a = 1/8\n");
  CHECK(f.get_double("a", 0.0) == 0.125);
}

TEST_CASE("config parse errors carry line numbers and key names") {
  CHECK_THROWS_MATCHES(ConfigMap::from_string("novalue\n"), ConfigError,
                       MessageMatches(ContainsSubstring("config line 1") &&
                                      ContainsSubstring("expected key = value")));
  CHECK_THROWS_MATCHES(ConfigMap::from_string("= 3\n"), ConfigError,
                       MessageMatches(ContainsSubstring("empty key")));
  CHECK_THROWS_MATCHES(ConfigMap::from_string("bad key = 3\n"), ConfigError,
                       MessageMatches(ContainsSubstring("bad key")));
  CHECK_THROWS_MATCHES(
      ConfigMap::from_string("a.b = 1\na.b = 2\n"), ConfigError,
      MessageMatches(ContainsSubstring("config line 2") &&
                     ContainsSubstring("duplicate key 'a.b'")));
}

TEST_CASE("config value accessors are strict about types") {
  ConfigMap m = ConfigMap::from_string(
      "n = 3.5\nm = 7x\nlist = 1/8, 1/16\nbadlist = 1/0\nempty =  \n");
  CHECK_THROWS_AS(m.get_int("n", 0), ConfigError);
  CHECK_THROWS_AS(m.get_int("m", 0), ConfigError);
  const std::vector<double> l = m.get_list("list", {});
  REQUIRE(l.size() == 2);
  CHECK(l[0] == 0.125);
  CHECK(l[1] == 0.0625);
  CHECK_THROWS_MATCHES(m.get_list("badlist", {}), ConfigError,
                       MessageMatches(ContainsSubstring("division by zero")));
  CHECK_THROWS_MATCHES(m.get_list("empty", {}), ConfigError,
                       MessageMatches(ContainsSubstring("empty list")));
  // Defaults are returned untouched for absent keys.
  CHECK(m.get_int("absent", -3) == -3);
  CHECK(m.get_string("absent", "dflt") == "dflt");
}

TEST_CASE("unknown keys are reported by name") {
  ConfigMap m = ConfigMap::from_string("study.kind = recovery\ntypo.key = 1\n");
  CHECK_THROWS_MATCHES(StudyConfig::from_map(m), ConfigError,
                       MessageMatches(ContainsSubstring("unknown config keys") &&
                                      ContainsSubstring("typo.key")));
}

TEST_CASE("study defaults depend on the study kind") {
  {
    ConfigMap m = ConfigMap::from_string("study.kind = recovery\n");
    StudyConfig cfg = StudyConfig::from_map(m);
    REQUIRE(cfg.h_list.size() == 5);
    CHECK(cfg.h_list.front() == 0.1);
    CHECK(cfg.h_list.back() == 1.0 / 160.0);
    CHECK(cfg.nz == 5);
    CHECK(cfg.nx2d == 64);
    CHECK(cfg.samples == 100);
    CHECK(cfg.outdir == "out");
    cfg.validate();  // default recovery config is self-consistent
  }
  {
    ConfigMap m = ConfigMap::from_string("study.kind = full-gamma\n");
    StudyConfig cfg = StudyConfig::from_map(m);
    REQUIRE(cfg.h_list.size() == 3);
    CHECK(cfg.h_list[0] == 0.125);
    CHECK(cfg.h_list[2] == 0.03125);
    CHECK(cfg.nz == 9);
  }
  {
    ConfigMap m = ConfigMap::from_string("study.kind = q2-table\n");
    StudyConfig cfg = StudyConfig::from_map(m);
    REQUIRE(cfg.h_list.size() == 1);
    CHECK(cfg.h_list[0] == 0.0625);
    CHECK(cfg.nz == 5);
  }
}

TEST_CASE("study validation rejects inconsistent settings") {
  auto make = [](const std::string& extra) {
    ConfigMap m = ConfigMap::from_string("study.kind = recovery\n" + extra);
    return StudyConfig::from_map(m);
  };
  CHECK_THROWS_AS(make("grid.nz = 4\n").validate(), ConfigError);
  CHECK_THROWS_AS(make("grid.nx2d = 4\n").validate(), ConfigError);
  CHECK_THROWS_AS(make("study.h_list = 1/10, 1/10\n").validate(), ConfigError);
  CHECK_THROWS_AS(make("study.h_list = 1/20, 1/10\n").validate(), ConfigError);
  CHECK_THROWS_AS(make("study.samples = 0\n").validate(), ConfigError);
  CHECK_THROWS_AS(make("solver.shrink = 1.5\n").validate(), ConfigError);
  {
    ConfigMap m = ConfigMap::from_string("study.kind = nonsense\n");
    CHECK_THROWS_AS(StudyConfig::from_map(m).validate(), ConfigError);
  }
  // A wildly curved midsurface folds the shell at the default thicknesses:
  // validation runs the admissibility check and reports a numerical failure.
  CHECK_THROWS_AS(make("geometry.amplitude = 200\n").validate(), NumericalError);
}

TEST_CASE("canonical echo is a parse fixed point") {
  ConfigMap m = ConfigMap::from_string(
      "study.kind = full-gamma\n"
      "geometry.amplitude = 0.5\n"
      "solver.method = lbfgs\n"
      "study.seed = 11\n");
  StudyConfig cfg = StudyConfig::from_map(m);
  m.require_all_consumed();
  cfg.validate();
  const std::vector<std::string> echo = cfg.canonical_echo();
  ConfigMap m2 = ConfigMap::from_string(join_lines(echo));
  StudyConfig cfg2 = StudyConfig::from_map(m2);
  m2.require_all_consumed();
  CHECK(cfg2.canonical_echo() == echo);
}

TEST_CASE("number formatting survives a string round trip") {
  const double values[] = {3.141592653589793,  1.0 / 3.0, 1e-300, -0.0,
                           6.02214076e23,      0.1,       -7.25,  1.0,
                           123456789.12345679, 2.2250738585072014e-308};
  for (double v : values) {
    const std::string s = format_number(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.0) == "0");
}

TEST_CASE("csv tables assemble comments, header, and rows") {
  CsvTable t;
  t.comments = {"mvklab", "study = demo"};
  t.header = "a,b";
  t.rows = {"1,2", "3,4"};
  CHECK(t.str() == "# mvklab\n# study = demo\na,b\n1,2\n3,4\n");
}

TEST_CASE("scalar field csv export lists nodes row-major with coordinates") {
  Grid2 g(Rect{0.0, 1.0, 0.0, 1.0}, 6, 5);
  Field2<double> f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      f(i, j) = g.node(i, j).x() + 2.0 * g.node(i, j).y();
  const std::vector<std::string> lines = split_lines(csv_field2(f, "probe"));
  REQUIRE(lines.size() == 1 + static_cast<std::size_t>(g.nx * g.ny));
  CHECK(lines[0] == "i,j,x1,x2,probe");
  const std::vector<std::string> first = split_csv(lines[1]);
  REQUIRE(first.size() == 5);
  CHECK(first[0] == "0");
  CHECK(first[1] == "0");
  const std::vector<std::string> probe = split_csv(lines[1 + 1 * g.nx + 1]);
  CHECK(probe[0] == "1");
  CHECK(probe[1] == "1");
  CHECK_THAT(std::stod(probe[4]),
             WithinRel(g.node(1, 1).x() + 2.0 * g.node(1, 1).y(), 1e-15));
  // The vector export carries two value columns.
  Field2<Vec2> w(g);
  const std::vector<std::string> vlines = split_lines(csv_field2(w));
  CHECK(vlines[0] == "i,j,x1,x2,u1,u2");
  REQUIRE(vlines.size() == lines.size());
}

TEST_CASE("force profiles are mean free and zero stays exactly zero") {
  StudyConfig cfg;
  cfg.domain = Rect{0.0, 2.0, 1.0, 2.5};
  cfg.nx2d = 13;
  cfg.ny2d = 13;
  Grid2 g = cfg.grid2();
  const double area =
      (cfg.domain.x1 - cfg.domain.x0) * (cfg.domain.y1 - cfg.domain.y0);
  for (const char* name : {"sinsin", "linear-x"}) {
    cfg.force_name = name;
    cfg.force_amplitude = 3.0;
    Field2<double> f = cfg.force_field(g);
    CHECK(std::abs(integrate2(f) / area) < 1e-14);
    double mx = 0.0;
    for (double v : f.data) mx = std::max(mx, std::abs(v));
    CHECK(mx > 0.1);  // non-trivial profile survives de-meaning
  }
  cfg.force_name = "zero";
  Field2<double> z = cfg.force_field(g);
  for (double v : z.data) CHECK(v == 0.0);
  cfg.force_name = "whirl";
  CHECK_THROWS_AS(cfg.force_field(g), ConfigError);
}

TEST_CASE("initial displacement builders match their closed forms") {
  StudyConfig cfg;
  cfg.nx2d = 11;
  cfg.ny2d = 11;
  Grid2 g = cfg.grid2();
  cfg.displacement_name = "parabolic";
  cfg.displacement_amplitude = 2.0;
  Displacement2D d = cfg.displacement(g);
  const Vec2 p = g.node(3, 8);
  CHECK_THAT(d.v(3, 8), WithinRel(0.5 * 2.0 * p.x() * p.x(), 1e-15));
  CHECK(d.u(3, 8).norm() == 0.0);

  constexpr double kPi = 3.141592653589793;
  cfg.displacement_name = "trig";
  cfg.displacement_amplitude = 1.25;
  Displacement2D t = cfg.displacement(g);
  const double sx = (p.x() - cfg.domain.x0) / (cfg.domain.x1 - cfg.domain.x0);
  const double sy = (p.y() - cfg.domain.y0) / (cfg.domain.y1 - cfg.domain.y0);
  CHECK_THAT(t.v(3, 8),
             WithinRel(1.25 * std::sin(kPi * sx) * std::sin(kPi * sy), 1e-13));
  CHECK_THAT(t.u(3, 8).x(),
             WithinRel(0.05 * 1.25 * std::sin(2.0 * kPi * sx) * std::cos(kPi * sy),
                       1e-12));

  cfg.displacement_name = "spiral";
  CHECK_THROWS_AS(cfg.displacement(g), ConfigError);
}

TEST_CASE("quadratic-form table lists the reference row and tight errors") {
  StudyConfig cfg;
  cfg.kind = "q2-table";
  cfg.samples = 25;
  cfg.seed = 5;
  cfg.h_list = {0.0625};
  const CsvTable t = run_q2_table(cfg);
  REQUIRE(!t.comments.empty());
  CHECK(t.comments[0] == kVersion);
  CHECK(t.header == "lambda,mu,g11,g12,g22,q2_closed,q2_min,abs_err,a1,a2,a3");
  REQUIRE(t.rows.size() == 26);  // reference row + samples
  const std::vector<std::string> ref = split_csv(t.rows[0]);
  REQUIRE(ref.size() == 11);
  CHECK(ref[0] == "1");
  CHECK(ref[1] == "1");
  CHECK(ref[2] == "1");
  CHECK(ref[3] == "0");
  CHECK(ref[4] == "1");
  CHECK_THAT(std::stod(ref[5]), WithinRel(20.0 / 3.0, 1e-14));
  CHECK_THAT(std::stod(ref[6]), WithinRel(20.0 / 3.0, 1e-12));
  CHECK_THAT(std::stod(ref[10]), WithinAbs(-1.0 / 3.0, 1e-10));
  for (const std::string& row : t.rows) {
    const std::vector<std::string> f = split_csv(row);
    REQUIRE(f.size() == 11);
    CHECK(std::stod(f[7]) <= 1e-10);
  }
  // Same seed, same table.
  const CsvTable t2 = run_q2_table(cfg);
  CHECK(t2.str() == t.str());
}

TEST_CASE("diagnostics bundle: rigidity ratios, rotation examples, residual maps") {
  StudyConfig cfg;
  cfg.kind = "diagnostics";
  cfg.samples = 8;
  cfg.seed = 3;
  cfg.nx2d = 16;
  cfg.ny2d = 16;
  cfg.nx3d = 16;
  cfg.ny3d = 16;
  cfg.nz = 5;
  cfg.h_list = {0.0625};
  cfg.validate();
  const DiagnosticsReport rep = run_diagnostics(cfg);

  const RigidityReport& rig = rep.rigidity;
  REQUIRE(rig.samples.size() == 8);
  CHECK_FALSE(rig.samples[0].applicable);  // exact rigid motion: 0/0 excluded
  CHECK(rig.samples[0].defect < 1e-12);
  REQUIRE(rig.samples[1].applicable);
  // constant-gradient perturbation: quotient 1 up to finite-difference
  // roundoff amplified by the O(eps^2) defect, so ~1e-9 accuracy at eps=1e-3
  CHECK_THAT(rig.samples[1].ratio, WithinRel(1.0, 1e-8));
  for (const RigiditySample& s : rig.samples)
    if (s.applicable) CHECK(s.ratio >= 1.0 - 1e-8);
  CHECK(rig.max_ratio > 1.0);
  CHECK(rig.max_ratio < 2.0);

  CHECK(rep.rigidity_csv.header == "index,epsilon,defect,best_fit,ratio");
  REQUIRE(rep.rigidity_csv.rows.size() == 8);
  CHECK_THAT(rep.rigidity_csv.rows[0], ContainsSubstring("n/a"));
  bool found_max = false;
  for (const std::string& c : rep.rigidity_csv.comments)
    if (c.find("max_ratio = ") != std::string::npos) found_max = true;
  CHECK(found_max);

  CHECK(rep.rotation_examples_csv.header ==
        "case,input_dist_to_result,orthogonality_defect,note");
  REQUIRE(rep.rotation_examples_csv.rows.size() == 3);
  const std::vector<std::string> rot = split_csv(rep.rotation_examples_csv.rows[0]);
  CHECK(rot[0] == "rotation");
  CHECK(std::stod(rot[1]) < 1e-12);  // nearest rotation of a rotation is itself
  CHECK(std::stod(rot[2]) < 1e-12);
  const std::vector<std::string> st = split_csv(rep.rotation_examples_csv.rows[2]);
  CHECK(st[0] == "pure-stretch");
  CHECK(std::stod(st[1]) < 1e-12);  // polar factor of a pure stretch: identity
  CHECK(std::stod(st[2]) < 1e-12);

  const std::vector<std::string> cl = split_lines(rep.compatibility_map_csv);
  CHECK(cl[0] == "i,j,x1,x2,compat_residual");
  CHECK(cl.size() == 1 + static_cast<std::size_t>(cfg.nx2d * cfg.ny2d));
  const std::vector<std::string> gl = split_lines(rep.gauss_map_csv);
  CHECK(gl[0] == "i,j,x1,x2,gauss_residual");
  CHECK(gl.size() == cl.size());

  CHECK_THROWS_AS(rigidity_probe(cfg.grid3(), 0, 1), ConfigError);
}

TEST_CASE("recovery study on a small config produces ordered rows") {
  ConfigMap m = ConfigMap::from_string(
      "study.kind = recovery\n"
      "study.h_list = 1/10, 1/20\n"
      "study.seed = 42\n"
      "grid.nx2d = 24\n"
      "grid.ny2d = 24\n"
      "grid.nx3d = 24\n"
      "grid.ny3d = 24\n"
      "grid.nz = 5\n"
      "geometry.midsurface = sinusoidal\n"
      "geometry.amplitude = 1.0\n"
      "material.lambda = 1.0\n"
      "material.mu = 1.0\n"
      "regime.kind = mvk\n"
      "displacement.name = parabolic\n"
      "displacement.amplitude = 1.0\n"
      "output.dir = out/recovery-small\n");
  StudyConfig cfg = StudyConfig::from_map(m);
  m.require_all_consumed();
  cfg.validate();
  const StudyReport rep = run_recovery_study(cfg);
  REQUIRE(rep.rows.size() == 2);
  CHECK_FALSE(rep.rows[0].has_order);
  REQUIRE(rep.rows[1].has_order);
  CHECK(std::abs(rep.rows[1].gap) < std::abs(rep.rows[0].gap));
  CHECK(rep.rows[1].observed_order > 0.5);
  for (const StudyRow& r : rep.rows) {
    CHECK_THAT(r.Eh, WithinRel(r.h * r.h * r.h * r.h, 1e-14));
    CHECK(r.fh == r.h);
    CHECK(r.limit_2d == rep.rows[0].limit_2d);  // one limit value per study
  }
  const CsvTable t = rep.to_csv();
  CHECK(t.comments[0] == kVersion);
  CHECK(t.header == "h,Eh,fh,rescaled_3d,limit_2d,gap,observed_order");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].back() == ',');           // no order on the first row
  CHECK(split_csv(t.rows[1]).size() == 7);  // order present afterwards
}

TEST_CASE("recovery study output is independent of the thread count") {
  ConfigMap m = ConfigMap::from_string(
      "study.kind = recovery\n"
      "study.h_list = 1/8, 1/16\n"
      "grid.nx2d = 16\n"
      "grid.ny2d = 16\n"
      "grid.nx3d = 16\n"
      "grid.ny3d = 16\n"
      "grid.nz = 5\n"
      "displacement.name = trig\n");
  StudyConfig cfg = StudyConfig::from_map(m);
  m.require_all_consumed();
  cfg.validate();
  const std::string base = run_recovery_study(cfg).to_csv().str();
  for (int nt : {2, 8}) {
    set_thread_count(nt);
    CHECK(run_recovery_study(cfg).to_csv().str() == base);
  }
  set_thread_count(1);
}

TEST_CASE("two-dimensional minimization reports consistent channels") {
  ConfigMap m = ConfigMap::from_string(
      "study.kind = minimize-2d\n"
      "grid.nx2d = 12\n"
      "grid.ny2d = 12\n"
      "force.name = sinsin\n"
      "displacement.name = trig\n"
      "displacement.amplitude = 0.3\n"
      "solver.method = lbfgs\n"
      "solver.max_iters = 60\n");
  StudyConfig cfg = StudyConfig::from_map(m);
  m.require_all_consumed();
  cfg.validate();
  const Minimize2DReport rep = run_minimize2d(cfg);
  CHECK(rep.summary_csv.header ==
        "final_energy,membrane,bending,force_work,iterations,stop_reason");
  REQUIRE(rep.summary_csv.rows.size() == 1);
  const std::vector<std::string> f = split_csv(rep.summary_csv.rows[0]);
  REQUIRE(f.size() == 6);
  const double total = std::stod(f[0]);
  const double membrane = std::stod(f[1]);
  const double bending = std::stod(f[2]);
  const double work = std::stod(f[3]);
  CHECK_THAT(total, WithinRel(membrane + bending - work, 1e-10));
  CHECK(membrane >= 0.0);
  CHECK(bending >= 0.0);
  CHECK(f[5] == rep.result.stop_reason);
  CHECK(rep.trace_csv.header == "iteration,energy,grad_norm,step");
  CHECK(rep.trace_csv.rows.size() == rep.result.trace.size());
  CHECK(split_lines(rep.u_csv)[0] == "i,j,x1,x2,u1,u2");
  CHECK(split_lines(rep.v_csv)[0] == "i,j,x1,x2,v");
}

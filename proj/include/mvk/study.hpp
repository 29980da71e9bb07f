#pragma once
// The study drivers behind the CLI subcommands: thickness sweeps comparing
// normalized 3D energies with their 2D limits, the plane-strain form table,
// the diagnostics bundle, and a bare 2D minimization. Each driver returns its
// data; writing files is a separate step so tests can check reports without
// touching the filesystem.
//
// Reports embed the tool version and a canonical config echo as comments.
// They carry no clock or host information: a report generated twice from the
// same config and seed must be byte-identical, whatever the thread count.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "mvk/config.hpp"
#include "mvk/diagnostics.hpp"

namespace mvk {

struct StudyRow {
  double h = 0.0, Eh = 0.0, fh = 0.0;
  double rescaled_3d = 0.0;  // (1/Eh) * 3D energy of the row's deformation
  double limit_2d = 0.0;     // the 2D functional value it is compared with
  double gap = 0.0;          // rescaled_3d - limit_2d
  double observed_order = 0.0;
  bool has_order = false;  // first row has no predecessor
};

struct StudyReport {
  std::string study_name;
  std::vector<std::string> config_echo;
  std::vector<StudyRow> rows;

  CsvTable to_csv() const {
    CsvTable t;
    t.comments.push_back(kVersion);
    t.comments.push_back("study = " + study_name);
    for (const auto& line : config_echo) t.comments.push_back(line);
    t.header = "h,Eh,fh,rescaled_3d,limit_2d,gap,observed_order";
    for (const auto& r : rows) {
      std::string row = format_number(r.h) + "," + format_number(r.Eh) + "," +
                        format_number(r.fh) + "," + format_number(r.rescaled_3d) + "," +
                        format_number(r.limit_2d) + "," + format_number(r.gap) + ",";
      if (r.has_order) row += format_number(r.observed_order);
      t.rows.push_back(row);
    }
    return t;
  }
};

namespace detail {

// Fills the order column from successive |gap| values.
inline void fill_orders(std::vector<StudyRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = std::abs(rows[i - 1].gap), cur = std::abs(rows[i].gap);
    if (prev > 0.0 && cur > 0.0) {
      rows[i].observed_order = observed_order(prev, cur, rows[i - 1].h / rows[i].h);
      rows[i].has_order = true;
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Recovery sweep: a fixed 2D displacement, its lifted 3D deformation per
// thickness, and the decay of the normalized energy gap.

inline StudyReport run_recovery_study(const StudyConfig& cfg) {
  const Midsurface ms = cfg.midsurface();
  const Material mat = cfg.material();
  const Regime regime = cfg.regime();
  const Grid2 g2 = cfg.grid2();
  const Displacement2D d = cfg.displacement(g2);
  const double limit = I_limit(d, ms, mat, regime);

  StudyReport report;
  report.study_name = "recovery";
  report.config_echo = cfg.canonical_echo();
  for (double h : cfg.h_list) {
    const ShellGeometry geo(ms, h, regime.fh(h));
    const Deformation3D y = build_recovery(d, geo, mat, regime, cfg.nz);
    StudyRow row;
    row.h = h;
    row.Eh = regime.Eh(h);
    row.fh = geo.fh;
    row.rescaled_3d = energy_Ih(y, geo, mat) / row.Eh;
    row.limit_2d = limit;
    row.gap = row.rescaled_3d - row.limit_2d;
    report.rows.push_back(row);
  }
  detail::fill_orders(report.rows);
  return report;
}

// ---------------------------------------------------------------------------
// Full comparison sweep: minimize the 2D limit, lift the minimizer, polish
// in 3D, and track how the normalized 3D minimum brackets the 2D one.

struct FullGammaRow {
  double h = 0.0;
  double min_J0 = 0.0;       // minimized 2D limit value
  double recovery_Jh = 0.0;  // normalized 3D energy of the lifted 2D minimizer
  double min_3d = 0.0;       // normalized 3D energy after polishing
  double rel_gap = 0.0;      // |min_3d - min_J0| / max(|min_J0|, 1e-300)
  double roundtrip_dist = 0.0;  // L2 distance, extracted vs 2D minimizer (gauge-fixed)
  int iters_2d = 0, iters_3d = 0;
  std::string stop_2d, stop_3d;
};

struct FullGammaReport {
  StudyReport study;  // the frozen 7-column sweep table
  std::vector<FullGammaRow> details;

  CsvTable details_csv() const {
    CsvTable t;
    t.comments.push_back(kVersion);
    t.comments.push_back("study = full-gamma (solver details)");
    t.header =
        "h,min_J0,recovery_Jh,min_3d,rel_gap,roundtrip_dist,iters_2d,iters_3d,stop_2d,stop_3d";
    for (const auto& r : details) {
      t.rows.push_back(format_number(r.h) + "," + format_number(r.min_J0) + "," +
                       format_number(r.recovery_Jh) + "," + format_number(r.min_3d) + "," +
                       format_number(r.rel_gap) + "," + format_number(r.roundtrip_dist) + "," +
                       std::to_string(r.iters_2d) + "," + std::to_string(r.iters_3d) + "," +
                       r.stop_2d + "," + r.stop_3d);
    }
    return t;
  }
};

inline FullGammaReport run_full_gamma_study(const StudyConfig& cfg) {
  const Midsurface ms = cfg.midsurface();
  const Material mat = cfg.material();
  const Regime regime = cfg.regime();
  // One in-plane grid for both sides of the comparison: the extra 2D
  // resolution a finer grid would buy is exactly the discretization error the
  // bracketing would then misread as a dimensional gap.
  const Grid2 g2 = cfg.grid2_slab();
  const Field2<double> f3 = cfg.force_field(g2);
  const ForceProfile fp{f3, regime.force_alpha()};

  FullGammaReport report;
  report.study.study_name = "full-gamma";
  report.study.config_echo = cfg.canonical_echo();

  Displacement2D d0 = cfg.displacement(g2);
  for (double h : cfg.h_list) {
    const Minimize2DResult r2 = minimize_limit(d0, ms, mat, regime, &f3, cfg.solver);
    const ShellGeometry geo(ms, h, regime.fh(h));
    const Deformation3D y0 = build_recovery(r2.d, geo, mat, regime, cfg.nz);
    const double eh = regime.Eh(h);
    const double recovery_jh = energy_Jh(y0, geo, mat, force_pullback(fp, h, regime)) / eh;
    const Minimize3DResult r3 = minimize_shell3d(y0, geo, mat, fp, regime, cfg.solver);

    StudyRow row;
    row.h = h;
    row.Eh = eh;
    row.fh = geo.fh;
    row.rescaled_3d = r3.energy;
    row.limit_2d = r2.energy;
    row.gap = row.rescaled_3d - row.limit_2d;
    report.study.rows.push_back(row);

    FullGammaRow det;
    det.h = h;
    det.min_J0 = r2.energy;
    det.recovery_Jh = recovery_jh;
    det.min_3d = r3.energy;
    det.rel_gap = std::abs(row.gap) / std::max(std::abs(r2.energy), 1e-300);
    const Displacement2D back =
        project_displacement2(displacement_roundtrip(r3.y, geo, regime), ms, regime);
    const Displacement2D ref = project_displacement2(r2.d, ms, regime);
    det.roundtrip_dist = displacement_l2_distance(back, ref);
    det.iters_2d = r2.iterations;
    det.iters_3d = r3.iterations;
    det.stop_2d = r2.stop_reason;
    det.stop_3d = r3.stop_reason;
    report.details.push_back(det);

    d0 = r2.d;  // warm-start the next thickness's 2D solve
  }
  detail::fill_orders(report.study.rows);
  return report;
}

// ---------------------------------------------------------------------------
// Plane-strain form table: closed form against exact relaxation, row by row.

inline CsvTable run_q2_table(const StudyConfig& cfg) {
  CsvTable t;
  t.comments.push_back(kVersion);
  t.comments.push_back("study = q2-table");
  for (const auto& line : cfg.canonical_echo()) t.comments.push_back(line);
  t.header = "lambda,mu,g11,g12,g22,q2_closed,q2_min,abs_err,a1,a2,a3";

  auto emit = [&](const Material& m, const Mat2& g) {
    const double closed = Q2(m, g);
    const Q2MinResult r = Q2_by_minimization(m, g);
    t.rows.push_back(format_number(m.lambda) + "," + format_number(m.mu) + "," +
                     format_number(g(0, 0)) + "," + format_number(g(0, 1)) + "," +
                     format_number(g(1, 1)) + "," + format_number(closed) + "," +
                     format_number(r.value) + "," + format_number(std::abs(closed - r.value)) +
                     "," + format_number(r.a(0)) + "," + format_number(r.a(1)) + "," +
                     format_number(r.a(2)));
  };

  emit(Material(cfg.material().kind, 1.0, 1.0), Mat2::Identity());  // reference row
  Rng rng(cfg.seed);
  for (int s = 0; s < cfg.samples; ++s) {
    const Material m(cfg.material().kind, rng.uniform(0.25, 4.0), rng.uniform(0.25, 4.0));
    Mat2 g;
    const double offdiag = rng.gaussian();
    g << rng.gaussian(), offdiag, offdiag, rng.gaussian();
    emit(m, g);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Diagnostics bundle: rigidity sweep, nearest-rotation examples, and the
// pointwise strain-compatibility / curvature-change residual maps.

struct DiagnosticsReport {
  RigidityReport rigidity;
  CsvTable rigidity_csv;
  CsvTable rotation_examples_csv;
  std::string compatibility_map_csv;
  std::string gauss_map_csv;
};

inline DiagnosticsReport run_diagnostics(const StudyConfig& cfg) {
  DiagnosticsReport out;

  out.rigidity = rigidity_probe(cfg.grid3(), cfg.samples, cfg.seed);
  CsvTable& rt = out.rigidity_csv;
  rt.comments.push_back(kVersion);
  rt.comments.push_back("study = diagnostics (rigidity probe)");
  for (const auto& line : cfg.canonical_echo()) rt.comments.push_back(line);
  rt.comments.push_back("max_ratio = " + format_number(out.rigidity.max_ratio));
  rt.header = "index,epsilon,defect,best_fit,ratio";
  for (const auto& s : out.rigidity.samples) {
    rt.rows.push_back(std::to_string(s.index) + "," + format_number(s.epsilon) + "," +
                      format_number(s.defect) + "," + format_number(s.best_fit) + "," +
                      (s.applicable ? format_number(s.ratio) : std::string("n/a")));
  }

  // Nearest-rotation spot rows: a rotation is its own projection, a small
  // antisymmetric perturbation projects to second order, and a pure stretch
  // projects to the identity.
  CsvTable& rot = out.rotation_examples_csv;
  rot.comments.push_back(kVersion);
  rot.comments.push_back("study = diagnostics (nearest rotation examples)");
  rot.header = "case,input_dist_to_result,orthogonality_defect,note";
  Rng rng(cfg.seed + 1);
  {
    const Mat3 r0 = detail::random_rotation(rng);
    const Mat3 r = nearest_rotation(r0);
    rot.rows.push_back("rotation," + format_number((r - r0).norm()) + "," +
                       format_number((r.transpose() * r - Mat3::Identity()).norm()) +
                       ",projection of a rotation is itself");
  }
  {
    const Mat3 a = detail::random_antisymmetric(rng) * 1e-4;
    const Mat3 r = nearest_rotation(Mat3::Identity() + a);
    rot.rows.push_back("near-identity," + format_number((r - (Mat3::Identity() + a)).norm()) +
                       "," + format_number((r.transpose() * r - Mat3::Identity()).norm()) +
                       ",antisymmetric part survives to first order");
  }
  {
    Mat3 d = Mat3::Zero();
    d.diagonal() << 2.0, 1.0, 1.0;
    const Mat3 r = nearest_rotation(d);
    rot.rows.push_back("pure-stretch," + format_number((r - Mat3::Identity()).norm()) + "," +
                       format_number((r.transpose() * r - Mat3::Identity()).norm()) +
                       ",positive definite input projects to identity");
  }

  // Residual maps for the configured displacement on the 2D grid.
  const Midsurface ms = cfg.midsurface();
  const Grid2 g2 = cfg.grid2();
  const Displacement2D d = cfg.displacement(g2);
  Field2<Mat2> sym_du(g2);
  const Field2<Mat2> du = grad2_vec(d.u);
  for (std::size_t n = 0; n < g2.size(); ++n) sym_du[n] = 0.5 * (du[n] + du[n].transpose());
  out.compatibility_map_csv = csv_field2(compatibility_residual(sym_du), "compat_residual");
  out.gauss_map_csv = csv_field2(gauss_residual(d.v, ms), "gauss_residual");
  return out;
}

// ---------------------------------------------------------------------------
// Bare 2D minimization with trace and final fields.

struct Minimize2DReport {
  Minimize2DResult result;
  EnergyBreakdown breakdown;
  CsvTable trace_csv;
  CsvTable summary_csv;
  std::string u_csv, v_csv;
};

inline Minimize2DReport run_minimize2d(const StudyConfig& cfg) {
  const Midsurface ms = cfg.midsurface();
  const Material mat = cfg.material();
  const Regime regime = cfg.regime();
  const Grid2 g2 = cfg.grid2();
  const Field2<double> f3 = cfg.force_field(g2);
  const Displacement2D d0 = cfg.displacement(g2);

  Minimize2DReport out;
  out.result = minimize_limit(d0, ms, mat, regime, &f3, cfg.solver);
  out.breakdown = limit_energy_breakdown(out.result.d, ms, mat, regime);

  CsvTable& tr = out.trace_csv;
  tr.comments.push_back(kVersion);
  tr.comments.push_back("study = minimize-2d (iteration trace)");
  for (const auto& line : cfg.canonical_echo()) tr.comments.push_back(line);
  tr.header = "iteration,energy,grad_norm,step";
  for (const auto& rec : out.result.trace)
    tr.rows.push_back(std::to_string(rec.iteration) + "," + format_number(rec.energy) + "," +
                      format_number(rec.grad_norm) + "," + format_number(rec.step));

  CsvTable& sm = out.summary_csv;
  sm.comments.push_back(kVersion);
  sm.comments.push_back("study = minimize-2d (summary)");
  sm.header = "final_energy,membrane,bending,force_work,iterations,stop_reason";
  const double force_work = integrate2_product(out.result.d.v, f3);
  sm.rows.push_back(format_number(out.result.energy) + "," + format_number(out.breakdown.membrane) +
                    "," + format_number(out.breakdown.bending) + "," + format_number(force_work) +
                    "," + std::to_string(out.result.iterations) + "," + out.result.stop_reason);

  out.u_csv = csv_field2(out.result.d.u);
  out.v_csv = csv_field2(out.result.d.v, "v");
  return out;
}

// ---------------------------------------------------------------------------
// Output writing. Data files are the deliverable; the gnuplot scripts beside
// them are a convenience for eyeballing the sweeps.

namespace detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void write_gap_plot(const StudyReport& report, const std::string& outdir) {
  std::string dat;
  for (const auto& r : report.rows)
    dat += format_number(r.h) + " " + format_number(std::abs(r.gap)) + "\n";
  write_text_file(join_path(outdir, "gap_vs_h.dat"), dat);
  std::string gp;
  gp += "set logscale xy\n";
  gp += "set xlabel 'h'\n";
  gp += "set ylabel '|gap|'\n";
  gp += "set key left top\n";
  gp += "set terminal png size 800,600\n";
  gp += "set output 'gap_vs_h.png'\n";
  gp += "plot 'gap_vs_h.dat' using 1:2 with linespoints title '" + report.study_name + " gap'\n";
  write_text_file(join_path(outdir, "gap_vs_h.gp"), gp);
}

}  // namespace detail

inline void write_outputs(const StudyReport& report, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  report.to_csv().write(detail::join_path(outdir, "study.csv"));
  detail::write_gap_plot(report, outdir);
}

inline void write_outputs(const FullGammaReport& report, const std::string& outdir) {
  write_outputs(report.study, outdir);
  report.details_csv().write(detail::join_path(outdir, "solver_details.csv"));
}

inline void write_q2_outputs(const CsvTable& table, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  table.write(detail::join_path(outdir, "q2_table.csv"));
}

inline void write_outputs(const DiagnosticsReport& report, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  report.rigidity_csv.write(detail::join_path(outdir, "rigidity.csv"));
  report.rotation_examples_csv.write(detail::join_path(outdir, "rotation_examples.csv"));
  write_text_file(detail::join_path(outdir, "compatibility_map.csv"),
                  report.compatibility_map_csv);
  write_text_file(detail::join_path(outdir, "gauss_map.csv"), report.gauss_map_csv);
}

inline void write_outputs(const Minimize2DReport& report, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  report.trace_csv.write(detail::join_path(outdir, "trace.csv"));
  report.summary_csv.write(detail::join_path(outdir, "summary.csv"));
  write_text_file(detail::join_path(outdir, "displacement_u.csv"), report.u_csv);
  write_text_file(detail::join_path(outdir, "displacement_v.csv"), report.v_csv);
}

}  // namespace mvk

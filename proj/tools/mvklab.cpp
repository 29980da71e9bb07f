// mvklab: command-line front end for the shell-energy studies.
//
// Subcommands:
//   recovery-study     thickness sweep of lifted-displacement energies
//   full-gamma-study   2D minimization, lift, 3D polish, bracket table
//   q2-table           plane-strain form: closed expression vs relaxation
//   minimize-2d        minimize the 2D limit functional, dump trace/fields
//   diagnostics        rigidity probe, rotation projection, residual maps
//   check-config       parse a config file and print its canonical echo
//
// Exit codes: 0 success, 2 configuration problem (bad file, bad flags),
// 3 numerical failure inside a study.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mvk/study.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  bool verbose = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* copt = cmd->add_option("--config", f.config_path, "configuration file (key = value lines)");
  if (needs_config) copt->required();
  cmd->add_option("--out", f.out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--seed", f.seed, "random seed (overrides study.seed)")
      ->each([&f](const std::string&) { f.seed_set = true; });
  cmd->add_option("--threads", f.threads, "worker threads for field loops")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--verbose", f.verbose, "print the effective configuration and row summaries");
}

mvk::StudyConfig load_config(const CommonFlags& f, const std::string& kind) {
  mvk::ConfigMap map =
      f.config_path.empty() ? mvk::ConfigMap{} : mvk::ConfigMap::from_file(f.config_path);
  const auto it = map.values.find("study.kind");
  if (it != map.values.end() && it->second != kind)
    throw mvk::ConfigError("config sets study.kind = " + it->second +
                           " but the subcommand runs a " + kind + " study");
  map.values["study.kind"] = kind;
  if (f.seed_set) map.values["study.seed"] = std::to_string(f.seed);
  if (!f.out_dir.empty()) map.values["output.dir"] = f.out_dir;
  return mvk::StudyConfig::from_map(map);
}

void echo_config(const mvk::StudyConfig& cfg) {
  for (const auto& line : cfg.canonical_echo()) std::cout << line << "\n";
}

void print_study_rows(const mvk::StudyReport& report) {
  for (const auto& r : report.rows) {
    std::cout << "  h = " << mvk::format_number(r.h) << "  rescaled_3d = "
              << mvk::format_number(r.rescaled_3d) << "  limit_2d = "
              << mvk::format_number(r.limit_2d) << "  gap = " << mvk::format_number(r.gap);
    if (r.has_order) std::cout << "  order = " << mvk::format_number(r.observed_order);
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical studies of thin-shell energies and their 2D limits"};
  app.require_subcommand(1);

  CommonFlags recovery_f, gamma_f, q2_f, min2d_f, diag_f, check_f;
  CLI::App* recovery = app.add_subcommand("recovery-study", "thickness sweep of lifted displacements");
  add_common_flags(recovery, recovery_f, false);
  CLI::App* gamma = app.add_subcommand("full-gamma-study", "minimize in 2D, lift, polish in 3D");
  add_common_flags(gamma, gamma_f, false);
  CLI::App* q2 = app.add_subcommand("q2-table", "plane-strain form cross-check table");
  add_common_flags(q2, q2_f, false);
  CLI::App* min2d = app.add_subcommand("minimize-2d", "minimize the 2D limit functional");
  add_common_flags(min2d, min2d_f, false);
  CLI::App* diag = app.add_subcommand("diagnostics", "rigidity probe and residual maps");
  add_common_flags(diag, diag_f, false);
  CLI::App* check = app.add_subcommand("check-config", "parse and echo a configuration");
  add_common_flags(check, check_f, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (recovery->parsed()) {
      mvk::set_thread_count(recovery_f.threads);
      const mvk::StudyConfig cfg = load_config(recovery_f, "recovery");
      if (recovery_f.verbose) echo_config(cfg);
      const mvk::StudyReport report = mvk::run_recovery_study(cfg);
      mvk::write_outputs(report, cfg.outdir);
      if (recovery_f.verbose) print_study_rows(report);
      std::cout << "recovery study written to " << cfg.outdir << "\n";
    } else if (gamma->parsed()) {
      mvk::set_thread_count(gamma_f.threads);
      const mvk::StudyConfig cfg = load_config(gamma_f, "full-gamma");
      if (gamma_f.verbose) echo_config(cfg);
      const mvk::FullGammaReport report = mvk::run_full_gamma_study(cfg);
      mvk::write_outputs(report, cfg.outdir);
      if (gamma_f.verbose) print_study_rows(report.study);
      std::cout << "full-gamma study written to " << cfg.outdir << "\n";
    } else if (q2->parsed()) {
      mvk::set_thread_count(q2_f.threads);
      const mvk::StudyConfig cfg = load_config(q2_f, "q2-table");
      if (q2_f.verbose) echo_config(cfg);
      const mvk::CsvTable table = mvk::run_q2_table(cfg);
      mvk::write_q2_outputs(table, cfg.outdir);
      std::cout << "q2 table (" << table.rows.size() << " rows) written to " << cfg.outdir << "\n";
    } else if (min2d->parsed()) {
      mvk::set_thread_count(min2d_f.threads);
      const mvk::StudyConfig cfg = load_config(min2d_f, "minimize-2d");
      if (min2d_f.verbose) echo_config(cfg);
      const mvk::Minimize2DReport report = mvk::run_minimize2d(cfg);
      mvk::write_outputs(report, cfg.outdir);
      std::cout << "minimization stopped by " << report.result.stop_reason << " after "
                << report.result.iterations << " iterations, energy "
                << mvk::format_number(report.result.energy) << "; written to " << cfg.outdir
                << "\n";
    } else if (diag->parsed()) {
      mvk::set_thread_count(diag_f.threads);
      const mvk::StudyConfig cfg = load_config(diag_f, "diagnostics");
      if (diag_f.verbose) echo_config(cfg);
      const mvk::DiagnosticsReport report = mvk::run_diagnostics(cfg);
      mvk::write_outputs(report, cfg.outdir);
      std::cout << "diagnostics written to " << cfg.outdir << " (rigidity max ratio "
                << mvk::format_number(report.rigidity.max_ratio) << ")\n";
    } else if (check->parsed()) {
      const mvk::StudyConfig cfg = [&] {
        mvk::ConfigMap map = mvk::ConfigMap::from_file(check_f.config_path);
        if (check_f.seed_set) map.values["study.seed"] = std::to_string(check_f.seed);
        if (!check_f.out_dir.empty()) map.values["output.dir"] = check_f.out_dir;
        return mvk::StudyConfig::from_map(map);
      }();
      echo_config(cfg);
    }
  } catch (const mvk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mvk::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

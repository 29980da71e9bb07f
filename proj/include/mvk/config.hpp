#pragma once
// Study configuration: a plain-text key=value format with dotted section
// prefixes (study.*, domain.*, grid.*, geometry.*, material.*, regime.*,
// force.*, displacement.*, solver.*, output.*). Unknown keys are hard
// errors: a silently ignored typo in, say, grid.nz would invalidate a
// convergence claim without any visible symptom. The canonical echo lists
// every effective key including defaulted ones, so a report can be replayed
// exactly from its own header comments.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mvk/geometry.hpp"
#include "mvk/midsurface.hpp"
#include "mvk/minimize.hpp"

namespace mvk {

struct ConfigMap {
  std::map<std::string, std::string> values;
  mutable std::set<std::string> consumed;

  static ConfigMap from_string(const std::string& text) {
    ConfigMap cfg;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
      ++lineno;
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string line = text.substr(pos, eol - pos);
      pos = eol + 1;

      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto notspace = [](unsigned char c) { return !std::isspace(c); };
      line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
      line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
      if (line.empty()) continue;

      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
      val.erase(val.begin(), std::find_if(val.begin(), val.end(), notspace));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      for (char c : key)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-')
          throw ConfigError("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
      if (!cfg.values.emplace(key, val).second)
        throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return cfg;
  }

  static ConfigMap from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_string(text);
  }

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    return it == values.end() ? def : it->second;
  }

  double get_double(const std::string& key, double def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    return parse_number(it->second, key);
  }

  int get_int(const std::string& key, int def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(it->second, &used);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an integer: '" + it->second + "'");
    }
    if (used != it->second.size())
      throw ConfigError("config key " + key + ": not an integer: '" + it->second + "'");
    return v;
  }

  std::uint64_t get_uint64(const std::string& key, std::uint64_t def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(it->second, &used);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a nonnegative integer: '" + it->second + "'");
    }
    if (used != it->second.size())
      throw ConfigError("config key " + key + ": not a nonnegative integer: '" + it->second + "'");
    return v;
  }

  // Comma-separated numbers; each entry is a decimal or a ratio like 1/160
  // (thickness lists read most naturally as fractions).
  std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return def;
    std::vector<double> out;
    const std::string& s = it->second;
    std::size_t start = 0;
    while (start <= s.size()) {
      std::size_t comma = s.find(',', start);
      if (comma == std::string::npos) comma = s.size();
      std::string tok = s.substr(start, comma - start);
      const auto notspace = [](unsigned char c) { return !std::isspace(c); };
      tok.erase(tok.begin(), std::find_if(tok.begin(), tok.end(), notspace));
      tok.erase(std::find_if(tok.rbegin(), tok.rend(), notspace).base(), tok.end());
      if (!tok.empty()) out.push_back(parse_number(tok, key));
      start = comma + 1;
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

  void require_all_consumed() const {
    std::string unknown;
    for (const auto& [key, val] : values)
      if (!consumed.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
  }

 private:
  static double parse_number(const std::string& s, const std::string& key) {
    const std::size_t slash = s.find('/');
    if (slash != std::string::npos) {
      const double num = parse_number(s.substr(0, slash), key);
      const double den = parse_number(s.substr(slash + 1), key);
      if (den == 0.0) throw ConfigError("config key " + key + ": division by zero in '" + s + "'");
      return num / den;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: '" + s + "'");
    }
    if (used != s.size())
      throw ConfigError("config key " + key + ": not a number: '" + s + "'");
    return v;
  }
};

struct StudyConfig {
  std::string kind = "recovery";  // recovery | full-gamma | q2-table | diagnostics | minimize-2d
  std::vector<double> h_list;
  std::uint64_t seed = 0;
  int samples = 100;  // row count for q2-table / diagnostics sweeps

  Rect domain;  // (0,1)^2 by default

  int nx2d = 64, ny2d = 64;
  int nx3d = 16, ny3d = 16;
  int nz = 0;  // 0 = per-study default, resolved during parsing

  std::string midsurface_name = "sinusoidal";
  double amplitude = 1.0;

  std::string material_kind = "stvk";  // stvk | squared-distance
  double lambda = 1.0, mu = 1.0;

  std::string regime_kind = "mvk";  // mvk | linearized
  double beta = 6.0;                // linearized regime exponent

  std::string force_name = "zero";  // zero | sinsin | linear-x
  double force_amplitude = 1.0;

  std::string displacement_name = "zero";  // zero | parabolic | trig
  double displacement_amplitude = 1.0;

  std::string outdir = "out";

  SolveOptions solver;

  static StudyConfig from_map(const ConfigMap& cfg) {
    StudyConfig sc;
    sc.kind = cfg.get_string("study.kind", sc.kind);
    sc.seed = cfg.get_uint64("study.seed", sc.seed);
    sc.samples = cfg.get_int("study.samples", sc.samples);

    sc.domain.x0 = cfg.get_double("domain.x0", 0.0);
    sc.domain.x1 = cfg.get_double("domain.x1", 1.0);
    sc.domain.y0 = cfg.get_double("domain.y0", 0.0);
    sc.domain.y1 = cfg.get_double("domain.y1", 1.0);

    sc.nx2d = cfg.get_int("grid.nx2d", sc.nx2d);
    sc.ny2d = cfg.get_int("grid.ny2d", sc.ny2d);
    sc.nx3d = cfg.get_int("grid.nx3d", sc.nx3d);
    sc.ny3d = cfg.get_int("grid.ny3d", sc.ny3d);
    sc.nz = cfg.get_int("grid.nz", sc.nz);

    sc.midsurface_name = cfg.get_string("geometry.midsurface", sc.midsurface_name);
    sc.amplitude = cfg.get_double("geometry.amplitude", sc.amplitude);

    sc.material_kind = cfg.get_string("material.kind", sc.material_kind);
    sc.lambda = cfg.get_double("material.lambda", sc.lambda);
    sc.mu = cfg.get_double("material.mu", sc.mu);

    sc.regime_kind = cfg.get_string("regime.kind", sc.regime_kind);
    sc.beta = cfg.get_double("regime.beta", sc.beta);

    sc.force_name = cfg.get_string("force.name", sc.force_name);
    sc.force_amplitude = cfg.get_double("force.amplitude", sc.force_amplitude);

    sc.displacement_name = cfg.get_string("displacement.name", sc.displacement_name);
    sc.displacement_amplitude = cfg.get_double("displacement.amplitude", sc.displacement_amplitude);

    sc.outdir = cfg.get_string("output.dir", sc.outdir);

    sc.solver.max_iters = cfg.get_int("solver.max_iters", sc.solver.max_iters);
    sc.solver.grad_tol = cfg.get_double("solver.grad_tol", sc.solver.grad_tol);
    sc.solver.step0 = cfg.get_double("solver.step0", sc.solver.step0);
    sc.solver.shrink = cfg.get_double("solver.shrink", sc.solver.shrink);
    sc.solver.c1 = cfg.get_double("solver.c1", sc.solver.c1);
    sc.solver.method = cfg.get_string("solver.method", sc.solver.method);
    sc.solver.lbfgs_memory = cfg.get_int("solver.lbfgs_memory", sc.solver.lbfgs_memory);

    // Study-kind defaults: thin sweeps for recovery, a short bracket sweep
    // for the full comparison, and one representative thickness otherwise.
    const std::vector<double> def_h =
        sc.kind == "full-gamma"
            ? std::vector<double>{1.0 / 8, 1.0 / 16, 1.0 / 32}
            : (sc.kind == "recovery"
                   ? std::vector<double>{1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160}
                   : std::vector<double>{1.0 / 16});
    sc.h_list = cfg.get_list("study.h_list", def_h);
    if (sc.nz == 0) sc.nz = (sc.kind == "full-gamma") ? 9 : 5;

    cfg.require_all_consumed();
    sc.validate();
    return sc;
  }

  static StudyConfig from_file(const std::string& path) {
    return from_map(ConfigMap::from_file(path));
  }

  void validate() const {
    static const std::set<std::string> kinds{"recovery", "full-gamma", "q2-table",
                                             "diagnostics", "minimize-2d"};
    if (!kinds.count(kind)) throw ConfigError("study.kind: unknown study '" + kind + "'");
    if (!(domain.width() > 0.0 && domain.height() > 0.0))
      throw ConfigError("domain: need x0 < x1 and y0 < y1");
    if (nx2d < 5 || ny2d < 5 || nx3d < 5 || ny3d < 5)
      throw ConfigError("grid: in-plane resolutions must be >= 5");
    if (nz < 3 || nz % 2 == 0) throw ConfigError("grid.nz: need odd nz >= 3");
    if (samples < 1) throw ConfigError("study.samples: must be >= 1");
    if (h_list.empty()) throw ConfigError("study.h_list: must not be empty");
    for (std::size_t i = 0; i < h_list.size(); ++i) {
      if (!(h_list[i] > 0.0)) throw ConfigError("study.h_list: thicknesses must be positive");
      if (i > 0 && !(h_list[i] < h_list[i - 1]))
        throw ConfigError("study.h_list: must be strictly decreasing");
    }
    solver.validate();
    material();  // constructor validates
    regime();
    const Midsurface ms = midsurface();
    const Grid2 g = grid2();
    const Regime reg = regime();
    for (double h : h_list) require_admissible(ShellGeometry(ms, h, reg.fh(h)), g);
  }

  Midsurface midsurface() const { return make_midsurface(midsurface_name, amplitude, domain); }

  Material material() const {
    if (material_kind == "stvk")
      return Material(MaterialKind::StVenantKirchhoff, lambda, mu);
    if (material_kind == "squared-distance")
      return Material(MaterialKind::SquaredDistance, lambda, mu);
    throw ConfigError("material.kind: unknown material '" + material_kind + "'");
  }

  Regime regime() const {
    if (regime_kind == "mvk") return Regime::mvk();
    if (regime_kind == "linearized") return Regime::linearized(beta);
    throw ConfigError("regime.kind: unknown regime '" + regime_kind + "'");
  }

  Grid2 grid2() const { return Grid2(domain, nx2d, ny2d); }
  Grid2 grid2_slab() const { return Grid2(domain, nx3d, ny3d); }
  Grid3 grid3() const { return Grid3(grid2_slab(), nz); }

  // Transverse load profile on a given grid, de-meaned with the grid's own
  // quadrature weights so constant vertical shifts are exact null directions
  // of the discrete work term.
  Field2<double> force_field(const Grid2& g) const {
    Field2<double> f(g);
    const double w = domain.width(), hgt = domain.height();
    const double cx = 0.5 * (domain.x0 + domain.x1);
    constexpr double pi = 3.141592653589793;
    if (force_name == "zero") {
      return f;
    } else if (force_name == "sinsin") {
      f = sample2(g, [&](const Vec2& x) {
        return force_amplitude * std::sin(pi * (x.x() - domain.x0) / w) *
               std::sin(pi * (x.y() - domain.y0) / hgt);
      });
    } else if (force_name == "linear-x") {
      f = sample2(g, [&](const Vec2& x) { return force_amplitude * (x.x() - cx); });
    } else {
      throw ConfigError("force.name: unknown force profile '" + force_name + "'");
    }
    const double mean = integrate2(f) / domain.area();
    for (std::size_t n = 0; n < g.size(); ++n) f[n] -= mean;
    return f;
  }

  // Manufactured / initial 2D displacement on a given grid.
  Displacement2D displacement(const Grid2& g) const {
    Displacement2D d(g);
    const double a = displacement_amplitude;
    const double w = domain.width(), hgt = domain.height();
    constexpr double pi = 3.141592653589793;
    if (displacement_name == "zero") {
      return d;
    } else if (displacement_name == "parabolic") {
      d.v = sample2(g, [&](const Vec2& x) { return 0.5 * a * x.x() * x.x(); });
    } else if (displacement_name == "trig") {
      auto sx = [&](const Vec2& x) { return (x.x() - domain.x0) / w; };
      auto sy = [&](const Vec2& x) { return (x.y() - domain.y0) / hgt; };
      d.v = sample2(g, [&](const Vec2& x) {
        return a * std::sin(pi * sx(x)) * std::sin(pi * sy(x));
      });
      d.u = sample2(g, [&](const Vec2& x) {
        return Vec2(0.05 * a * std::sin(2.0 * pi * sx(x)) * std::cos(pi * sy(x)),
                    0.05 * a * std::cos(pi * sx(x)) * std::sin(2.0 * pi * sy(x)));
      });
    } else {
      throw ConfigError("displacement.name: unknown displacement '" + displacement_name + "'");
    }
    return d;
  }

  // Every effective key in a fixed order; parsing this text reproduces the
  // configuration exactly.
  std::vector<std::string> canonical_echo() const {
    std::vector<std::string> out;
    auto put = [&](const std::string& k, const std::string& v) { out.push_back(k + " = " + v); };
    auto putd = [&](const std::string& k, double v) { put(k, format_number(v)); };
    auto puti = [&](const std::string& k, long long v) { put(k, std::to_string(v)); };
    put("study.kind", kind);
    std::string hs;
    for (std::size_t i = 0; i < h_list.size(); ++i)
      hs += (i ? "," : "") + format_number(h_list[i]);
    put("study.h_list", hs);
    puti("study.seed", static_cast<long long>(seed));
    puti("study.samples", samples);
    putd("domain.x0", domain.x0);
    putd("domain.x1", domain.x1);
    putd("domain.y0", domain.y0);
    putd("domain.y1", domain.y1);
    puti("grid.nx2d", nx2d);
    puti("grid.ny2d", ny2d);
    puti("grid.nx3d", nx3d);
    puti("grid.ny3d", ny3d);
    puti("grid.nz", nz);
    put("geometry.midsurface", midsurface_name);
    putd("geometry.amplitude", amplitude);
    put("material.kind", material_kind);
    putd("material.lambda", lambda);
    putd("material.mu", mu);
    put("regime.kind", regime_kind);
    putd("regime.beta", beta);
    put("force.name", force_name);
    putd("force.amplitude", force_amplitude);
    put("displacement.name", displacement_name);
    putd("displacement.amplitude", displacement_amplitude);
    put("output.dir", outdir);
    puti("solver.max_iters", solver.max_iters);
    putd("solver.grad_tol", solver.grad_tol);
    putd("solver.step0", solver.step0);
    putd("solver.shrink", solver.shrink);
    putd("solver.c1", solver.c1);
    put("solver.method", solver.method);
    puti("solver.lbfgs_memory", solver.lbfgs_memory);
    return out;
  }
};

}  // namespace mvk

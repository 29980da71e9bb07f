#pragma once
// Thin-film scaling regimes. The energy-per-thickness scale is E_h = h^beta
// with beta = 4 in the von Karman regime and beta > 4 in the linearized one;
// the applied-force order alpha satisfies E_h = h^(2 alpha - 2). The
// midsurface height scale obeys fh = max(h, sqrt(E_h)/h), which equals h in
// both regimes exercised here.

#include <algorithm>
#include <cmath>

#include "mvk/core.hpp"

namespace mvk {

enum class RegimeKind { MvK, Linearized };

struct Regime {
  RegimeKind kind = RegimeKind::MvK;
  double beta = 6.0;  // energy exponent, used by the linearized regime only

  static Regime mvk() { return Regime{RegimeKind::MvK, 4.0}; }
  static Regime linearized(double beta_) {
    if (!(beta_ > 4.0)) throw ConfigError("linearized regime needs beta > 4");
    return Regime{RegimeKind::Linearized, beta_};
  }

  double exponent() const { return kind == RegimeKind::MvK ? 4.0 : beta; }
  double Eh(double h) const { return std::pow(h, exponent()); }
  double fh(double h) const { return std::max(h, std::sqrt(Eh(h)) / h); }
  double force_alpha() const { return 0.5 * (exponent() + 2.0); }

  // Amplitudes of the in-plane / out-of-plane displacements in the recovery
  // ansatz, and the inverse factors used when extracting averaged
  // displacements from a 3D deformation.
  double u_scale(double h) const {
    return kind == RegimeKind::MvK ? Eh(h) / (h * h) : std::sqrt(Eh(h));
  }
  double v_scale(double h) const { return std::sqrt(Eh(h)) / h; }
  double u_extract(double h) const {
    return std::min(h * h / Eh(h), 1.0 / std::sqrt(Eh(h)));
  }
  double v_extract(double h) const { return h / std::sqrt(Eh(h)); }
};

}  // namespace mvk

#pragma once

#include <stdexcept>

namespace nematic {

/// Physical and penalty constants of the coupled free-energy model.
/// Defaults are the nondimensionalized 5CB set used by the experiments.
struct MaterialParams {
  double K1 = 1.0;        // splay
  double K2 = 0.62903;    // twist
  double K3 = 1.32258;    // bend
  double eps0 = 1.42809;  // free-space permittivity
  double eps_perp = 7.0;  // perpendicular permittivity
  double eps_a = 11.5;    // dielectric anisotropy (eps_par - eps_perp)
  double es = 1.5;        // splay flexoelectric constant
  double eb = -1.5;       // bend flexoelectric constant
  double zeta = 1.0e5;    // unit-length penalty weight

  double kappa() const { return K2 / K3; }
  double eps_par() const { return eps_a + eps_perp; }

  void validate() const {
    if (K1 <= 0.0 || K2 <= 0.0 || K3 <= 0.0)
      throw std::invalid_argument("MaterialParams: Frank constants must be positive");
    if (eps0 <= 0.0 || eps_perp <= 0.0)
      throw std::invalid_argument("MaterialParams: permittivities must be positive");
    if (zeta <= 0.0)
      throw std::invalid_argument("MaterialParams: penalty weight must be positive");
  }
};

}  // namespace nematic

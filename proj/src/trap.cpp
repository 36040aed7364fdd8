#include "chm/trap.hpp"

#include <cmath>
#include <string>

#include "chm/constants.hpp"
#include "chm/errors.hpp"

namespace chm {

namespace k = constants;

void TrapConfig::validate() const {
  for (double w : omega) {
    if (!(w > 0.0)) throw ConfigError("trap.omega components must be > 0");
  }
  if (!(atom_mass > 0.0)) throw ConfigError("trap.atom_mass must be > 0");
  if (feshbach.width_mT == 0.0) throw ConfigError("feshbach.width must be nonzero");
  const double a_zc = scattering_length(B_zc_mT, *this);
  if (std::abs(a_zc) > 1e-12) {
    throw ConfigError("feshbach parameters inconsistent with B_zc: a(B_zc) = " +
                      std::to_string(a_zc) + " a0");
  }
}

TrapConfig default_trap() {
  TrapConfig t;
  t.omega = {k::two_pi * 395.0, k::two_pi * 1140.0, k::two_pi * 950.0};
  t.delta_omega = {k::two_pi * 0.12, k::two_pi * 0.35, k::two_pi * 0.29};
  t.atom_mass = k::mass_K40;
  t.feshbach = FeshbachParams{};
  t.B_zc_mT = 20.907;
  return t;
}

double scattering_length(double B_mT, const TrapConfig& trap) {
  const auto& f = trap.feshbach;
  if (B_mT == f.B0_mT) throw NumericalError("scattering_length evaluated at the resonance pole");
  return f.a_bg_a0 * (1.0 - f.width_mT / (B_mT - f.B0_mT));
}

double field_for_scattering_length(double a_a0, const TrapConfig& trap) {
  const auto& f = trap.feshbach;
  const double r = 1.0 - a_a0 / f.a_bg_a0;
  if (r == 0.0) throw NumericalError("requested scattering length lies at the resonance asymptote");
  return f.B0_mT + f.width_mT / r;
}

double interaction_scale(double a_a0, const TrapConfig& trap) {
  const double a_m = a_a0 * k::bohr_radius;
  const double w3 = trap.omega[0] * trap.omega[1] * trap.omega[2];
  return 4.0 * M_PI * a_m * std::sqrt(trap.atom_mass * w3 / k::hbar);
}

double fermi_energy(long atom_count, const TrapConfig& trap) {
  if (atom_count < 1) throw ConfigError("fermi_energy requires N >= 1");
  const double wbar = std::cbrt(trap.omega[0] * trap.omega[1] * trap.omega[2]);
  return std::cbrt(6.0 * static_cast<double>(atom_count)) * k::hbar * wbar;
}

}  // namespace chm

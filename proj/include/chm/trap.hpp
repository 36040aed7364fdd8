#ifndef CHM_TRAP_HPP
#define CHM_TRAP_HPP

#include <array>

namespace chm {

// Feshbach resonance parametrization a(B) = a_bg (1 - width / (B - B0)).
// Fields in mT, a_bg in Bohr radii.
struct FeshbachParams {
  double a_bg_a0 = 174.0;
  double B0_mT = 20.210;
  double width_mT = 0.697;
};

// Static trap and species parameters. Angular frequencies in rad/s.
struct TrapConfig {
  std::array<double, 3> omega{};        // trap frequencies (rad/s)
  std::array<double, 3> delta_omega{};  // differential shifts (rad/s)
  double atom_mass = 0.0;               // kg
  FeshbachParams feshbach{};
  double B_zc_mT = 20.907;              // zero-crossing field

  // Throws ConfigError if frequencies are non-positive or the Feshbach
  // parameters are inconsistent with the zero crossing (|a(B_zc)| > 1e-12 a0).
  void validate() const;
};

// Trap used throughout the measurements: omega = 2pi x {395, 1140, 950} Hz,
// 40K mass, resonance zero crossing at 20.907 mT. delta_omega defaults to a
// plausible sub-Hz curvature splitting; instance builders rescale it to hit a
// requested field inhomogeneity.
TrapConfig default_trap();

// Signed s-wave scattering length in Bohr radii at field B (mT).
// Throws NumericalError at the resonance pole B = B0.
double scattering_length(double B_mT, const TrapConfig& trap);

// Inverse of scattering_length on the zero-crossing branch: the field (mT)
// at which a(B) equals the requested length.
double field_for_scattering_length(double a_a0, const TrapConfig& trap);

// Interaction scale U = 4 pi a sqrt(m wx wy wz / hbar) in rad/s; a in Bohr
// radii. Sign of U follows the sign of a.
double interaction_scale(double a_a0, const TrapConfig& trap);

// Fermi energy E_F = (6N)^{1/3} hbar wbar (J), wbar the geometric mean of
// the trap frequencies.
double fermi_energy(long atom_count, const TrapConfig& trap);

}  // namespace chm

#endif

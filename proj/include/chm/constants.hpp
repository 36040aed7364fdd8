#ifndef CHM_CONSTANTS_HPP
#define CHM_CONSTANTS_HPP

// Physical constants (CODATA 2022) in SI units.
namespace chm::constants {

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double planck_h = 6.62607015e-34;     // J s (exact)
inline constexpr double boltzmann_kB = 1.380649e-23;   // J/K (exact)
inline constexpr double bohr_radius = 5.29177210544e-11;  // m
inline constexpr double atomic_mass_unit = 1.66053906892e-27;  // kg

// 40K atomic mass; the simulator's default species.
inline constexpr double mass_K40_u = 39.96399848;
inline constexpr double mass_K40 = mass_K40_u * atomic_mass_unit;

inline constexpr double two_pi = 6.283185307179586476925286766559;

}  // namespace chm::constants

#endif

#ifndef CHM_MODE_LATTICE_HPP
#define CHM_MODE_LATTICE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "chm/trap.hpp"

namespace chm {

using ModeIndex = std::array<int, 3>;

// The occupied single-particle modes of one sampled realization, with their
// axial fields h_i = 2 n_i . delta_omega (rad/s).
struct ModeSet {
  std::vector<ModeIndex> modes;
  std::vector<double> fields;      // rad/s
  TrapConfig trap;
  double temperature = 0.0;        // T / (E_F / k_B), dimensionless
  long target_N = 0;
  long realized_N = 0;
  double chemical_potential = 0.0; // J
  std::uint64_t seed = 0;
  bool centered_fields = false;    // mean field subtracted (rotating-frame shift)

  void validate() const;
};

struct SamplingOptions {
  bool fixed_N = false;        // resample until |realized - target| <= 2% target
  bool center_fields = false;  // subtract the mean of h_i
  int max_resample = 1000;
};

// Axial field h = 2 n . delta_omega for one mode (rad/s).
double axial_field(const ModeIndex& n, const std::array<double, 3>& delta_omega);

// Draw the occupied modes from a Fermi-Dirac distribution at temperature
// T = T_over_TF * E_F / k_B. The chemical potential is solved by bisection so
// that the expected occupation over the cutoff E_n < E_F + 12 k_B T equals
// target_N; occupancy is then a Bernoulli draw per mode.
ModeSet sample_occupied_modes(const TrapConfig& trap, long target_N, double T_over_TF,
                              std::uint64_t seed, const SamplingOptions& options = {});

// Population standard deviation of the axial fields (rad/s).
double field_inhomogeneity(const ModeSet& ms);

// Rescale delta_omega so that field_inhomogeneity(ms) == h_tilde_target,
// recomputing every h_i exactly from the mode indices.
void rescale_fields(ModeSet& ms, double h_tilde_target);

// Symmetric spin-exchange couplings J_ij = scale_U * rescale * factors_ij.
struct CouplingMatrix {
  long n = 0;
  double scale_U = 0.0;   // rad/s
  double rescale = 1.0;   // dimensionless multiplier on the overlap factors
  std::vector<double> factors;  // dense row-major n x n, symmetric, zero diagonal

  double factor(long i, long j) const { return factors[i * n + j]; }
  double coupling(long i, long j) const { return scale_U * rescale * factor(i, j); }

  void validate() const;
};

// Dense coupling factors: product of the three 1D density overlaps per axis.
CouplingMatrix coupling_matrix(const ModeSet& ms, double scale_U, double rescale = 1.0);

// Mean interaction strength J = sum_ij J_ij / N^2 (rad/s).
double mean_coupling(const CouplingMatrix& cm);

// Mean of the dimensionless overlap factors, sum_ij factors_ij / N^2.
double mean_factor(const CouplingMatrix& cm);

}  // namespace chm

#endif

#ifndef CHM_SWEEP_HPP
#define CHM_SWEEP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chm/lax.hpp"
#include "chm/mode_lattice.hpp"
#include "chm/spin_dynamics.hpp"

namespace chm {

// A concrete simulation instance pinned to target (h~, NJ) values: a mode
// set with rescaled fields and a coupling matrix whose scale reproduces NJ.
struct Instance {
  ModeSet modes;
  CouplingMatrix couplings;
  double h_tilde = 0.0;  // rad/s
  double NJ = 0.0;       // rad/s, realized_N * mean_coupling
  double a_a0 = 0.0;     // scattering length implied by scale_U
};

// Thermal full-model instance: sample modes, rescale delta_omega to hit
// h_tilde_target, choose U so that realized_N * J equals NJ_target.
Instance build_thermal_instance(const TrapConfig& trap, long target_N, double T_over_TF,
                                std::uint64_t seed, double h_tilde_target, double NJ_target,
                                double rescale = 1.0,
                                const SamplingOptions& sampling = {});

// Equally spaced fields on [-W, W] with population std h_tilde: the 1D
// zero-temperature pattern in which the analytic formulas are exact.
std::vector<double> uniform_grid_fields(long n, double h_tilde);

struct SweepCell {
  double h_tilde = 0.0;  // rad/s (target)
  double NJ = 0.0;       // rad/s (target)
  double S_readout = 0.0;
  double S_steady = 0.0;
  long realized_N = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

struct SweepGrid {
  std::vector<double> h_tilde_axis;  // rad/s
  std::vector<double> NJ_axis;       // rad/s
  double readout_time = 0.0;         // s
  bool with_steady = false;
  std::vector<SweepCell> cells;      // row-major: [ih * NJ_axis.size() + ij]

  const SweepCell& at(std::size_t ih, std::size_t ij) const {
    return cells[ih * NJ_axis.size() + ij];
  }
};

struct SweepOptions {
  long target_N = 500;
  double T_over_TF = 0.4;
  double rescale = 1.0;
  double readout_time = 0.1;      // s
  double window_fraction = 1.0 / 3.0;
  double rtol = 1e-8;
  double atol = 1e-8;
  int workers = 0;                // 0: hardware concurrency
  bool all_to_all_uniform = false;  // synthetic 1D fields + uniform coupling
  bool resample_per_cell = true;    // full-resample mode (default) vs shared base
  bool with_steady = false;         // also integrate to steady_horizon and average
  double steady_horizon = 2.0;      // s
  int sample_count = 96;
  bool dephasing = false;
  double Gamma0_inv_s = 0.57;
  double gamma_inv_s = 600.0;
  std::uint64_t master_seed = 1;
  TrapConfig trap{};
};

// Evolve every (h~, NJ) cell from the pi/2-initialized state and record the
// magnetization at the readout time (and optionally a late-window average).
// Cells run in a worker pool; per-cell RNG is derived from
// (master_seed, cell_index) so results never depend on the worker count.
SweepGrid sweep_phase_diagram(const std::vector<double>& h_tilde_axis,
                              const std::vector<double>& NJ_axis, const SweepOptions& options);

struct CriticalPoint {
  double h_tilde = 0.0;  // rad/s
  double NJ_c = 0.0;     // rad/s
};

struct CriticalLine {
  std::vector<CriticalPoint> points;
  std::vector<std::size_t> rows_without_crossing;
  double slope = 0.0;  // least-squares slope of NJ_c vs h_tilde through the origin
};

// Per h~ row, locate NJ_c by interpolated threshold crossing of the readout
// (or steady) magnetization, at `threshold` times the large-NJ plateau of
// that row. Rows without a crossing are omitted and flagged.
CriticalLine extract_critical_line(const SweepGrid& grid, double threshold = 0.5,
                                   bool use_steady = false);

}  // namespace chm

#endif

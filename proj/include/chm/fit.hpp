#ifndef CHM_FIT_HPP
#define CHM_FIT_HPP

#include <vector>

#include "chm/spin_dynamics.hpp"

namespace chm {

// Closed-form non-interacting signal S_{J=0}(t) = (1/2) |sum_j e^{i h_j t}|.
double free_dephasing_signal(const std::vector<double>& fields, double t);
std::vector<double> free_dephasing_signal(const std::vector<double>& fields,
                                          const std::vector<double>& times);

// chi^2 = sum_k (S(t_k) - ref_k)^2 / sigma_k^2; uniform sigma = 1 when none
// are supplied. Grids must match point for point.
double chi2_distance(const TrajectoryRecord& traj, const std::vector<double>& reference,
                     const std::vector<double>& sigma = {});

struct GapFit {
  double Omega = 0.0;           // rad/s
  double damping = 0.0;         // 1/s
  double S_infinity = 0.0;
  double crossover_time = 0.0;  // s
  double amplitude = 0.0;
  double phase = 0.0;
  double residual = 0.0;        // root-mean-square misfit
  bool converged = false;
};

// Piecewise gap model: S_{J=0}(t) below the crossover, a damped sinusoid
// about S_infinity above it, continuous at the crossover. Nonlinear least
// squares over (t_c, kappa, Omega) with the linear amplitudes eliminated;
// Omega is seeded from the dominant discrete-spectrum peak of S - mean.
GapFit fit_gap(const TrajectoryRecord& traj, const std::vector<double>& fields);

// Mean of S over the final window_fraction of the record.
double steady_state_average(const TrajectoryRecord& traj, double window_fraction);
double steady_state_average(const std::vector<double>& times, const std::vector<double>& S,
                            double window_fraction);

}  // namespace chm

#endif

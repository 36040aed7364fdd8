#ifndef CHM_RAMSEY_HPP
#define CHM_RAMSEY_HPP

#include <cstdint>
#include <vector>

namespace chm {

// One simulated Ramsey measurement campaign. The interferometric phase of
// each shot drifts shot to shot; it is stored only so tests can build
// oracles against it.
struct ShotRecord {
  std::vector<double> hidden_phases;  // rad
  std::vector<double> fractions_up;   // in [0, 1]
  long atoms_per_shot = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

// Per shot: draw phi uniform on [0, 2pi), form the ideal up-fraction
// (1 + A cos phi)/2 with A = 2 S_perp / N, add binomial projection noise at
// the given atom number plus Gaussian technical noise, clamp to [0, 1].
ShotRecord simulate_shots(double S_perp_norm, long atoms, long n_shots, double noise_sigma,
                          std::uint64_t seed);

struct MleEstimate {
  double amplitude = 0.0;  // estimate of A in [0, 1]
  double ci_low = 0.0;
  double ci_high = 1.0;
  double log_likelihood = 0.0;
  bool degenerate = false;  // boundary estimate from a flat likelihood
};

// Maximum-likelihood amplitude under the randomized-phase marginal
// likelihood: L(A) = prod_k (1/2pi) int dphi Normal(f_k; (1+A cos phi)/2, sigma_eff^2(phi)),
// with sigma_eff combining the binomial variance at the given atom number and
// the technical noise. The phase integral uses a 256-point periodic
// trapezoid; the maximization is golden-section over a bracketing grid and
// the confidence interval comes from the log-likelihood curvature.
MleEstimate mle_amplitude(const ShotRecord& record);

}  // namespace chm

#endif

#ifndef CHM_LAX_HPP
#define CHM_LAX_HPP

#include <complex>
#include <vector>

#include "chm/spin_state.hpp"

namespace chm {

// Renormalization parameters of the analytic order-parameter and gap
// formulas; J_eff = beta * J. alpha = beta = 1 is the exactness regime
// (1D uniform fields, zero temperature).
struct AnalyticParams {
  double alpha = 1.0;
  double beta = 1.0;
};

struct LaxSpectrum {
  std::vector<std::complex<double>> roots;  // rad/s, conjugate-closed
  enum class Phase { I, II } phase = Phase::I;
  std::complex<double> dominant_pair{0.0, 0.0};  // root with the largest |Im|
  double gap_estimate = 0.0;                     // rad/s, 2 * max |Im root|
  double pair_tolerance = 0.0;
  double epsilon_spread = 0.0;                   // rad/s, spread of h_j / 2
};

// L(u) . L(u) with L(u) = Z/J - sum_j s_j / (u - h_j/2). Conserved along
// all-to-all trajectories; evaluating it at t = 0 fixes the spectrum.
std::complex<double> lax_square(std::complex<double> u, const std::vector<double>& fields,
                                double J, const SpinState& state);

// Monic real polynomial Q(u) = J^2 L^2(u) prod_j (u - eps_j)^2 of degree 2N,
// built by exact polynomial arithmetic over the partial-fraction form. The
// variable is internally centered on mean(eps) and scaled by the spread for
// conditioning; roots map back rigidly. Extended precision above N = 200.
struct SpectralPolynomial {
  std::vector<long double> coeffs;  // ascending, monic, in the scaled variable
  double scale = 1.0;               // u = scale * u' + shift
  double shift = 0.0;
  bool extended = false;            // construction ran in long double

  long degree() const { return static_cast<long>(coeffs.size()) - 1; }
  std::complex<double> to_physical(std::complex<long double> u_scaled) const;
};

SpectralPolynomial spectral_polynomial(const std::vector<double>& fields, double J,
                                       const SpinState& state);

// All roots of an ascending-coefficient real polynomial: Aberth-Ehrlich
// simultaneous iteration with a companion-matrix fallback. Conjugate
// symmetry is enforced by pairing.
std::vector<std::complex<double>> find_polynomial_roots(const std::vector<long double>& coeffs);

// Roots of the spectral polynomial in physical units (rad/s), seeded at the
// doubled eps_j. The Aberth iteration evaluates the Newton ratio through the
// logarithmic derivative of the partial-fraction form,
//   Q'/Q = sum_j 2/(u - eps_j) + 2 (L . L') / L^2,
// which stays conditioned at sizes where the monomial coefficients of Q
// cancel catastrophically; the coefficient route remains as a small-N
// fallback (companion matrix).
std::vector<std::complex<double>> find_roots(const std::vector<double>& fields, double J,
                                             const SpinState& state);

// Phase II iff a conjugate pair with |Im| > pair_tolerance * spread(eps_j)
// exists; gap_estimate = 2 max |Im| (cross-validated against the fitted gap).
LaxSpectrum classify_phase(const std::vector<std::complex<double>>& roots,
                           double epsilon_spread, double pair_tolerance = 1e-4);

// Steady-state order parameter S(inf) = (sqrt3 a h~ / 2 J_eff) cot(sqrt3 a h~ / N J_eff),
// clamped to [0, N/2]; 0 below the critical coupling.
double steady_magnetization_analytic(double h_tilde, long n, double J, const AnalyticParams& p);

// Gap frequency Omega = 2 |J_eff| S(inf); 0 at and below the critical coupling.
double gap_analytic(double h_tilde, long n, double J, const AnalyticParams& p);

// J_c(h~) = 2 sqrt3 alpha h~ / (beta N pi).
double critical_coupling(double h_tilde, long n, const AnalyticParams& p);

// Least-squares fit of the gap formula to measured (NJ, Omega) pairs,
// mirroring the gap-spectroscopy workflow. NJ and Omega in rad/s.
AnalyticParams fit_alpha_beta(const std::vector<double>& NJ, const std::vector<double>& Omega,
                              double h_tilde, long n, AnalyticParams initial = {0.3, 0.6});

}  // namespace chm

#endif

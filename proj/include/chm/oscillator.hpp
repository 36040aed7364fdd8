#ifndef CHM_OSCILLATOR_HPP
#define CHM_OSCILLATOR_HPP

#include <vector>

namespace chm {

// K-point Gauss-Hermite rule for integrals against exp(-u^2).
// `weights` store w_k * exp(u_k^2) (the "total" weights), so
//   integral f(u) exp(-u^2) du  =  sum_k weights[k] * exp(-u_k^2) * f(u_k)
// and integrals of products of Hermite *functions* can be summed without
// reconstructing the underflowing Gaussian.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached rule lookup; rules are built by Golub-Welsch eigenvalues with a
// Newton polish and total weights from the orthonormal-function identity
// w_k e^{u_k^2} = 1 / sum_{j<K} phi_j(u_k)^2.
const GaussHermiteRule& gauss_hermite(int point_count);

// Orthonormal oscillator eigenfunctions phi_n(x) (oscillator units),
// evaluated by an exponent-tracked recurrence so that values beyond the
// classical turning point underflow gracefully to zero instead of poisoning
// the recurrence. Returns phi_n(x) and phi_m(x).
void hermite_function_pair(int n, int m, double x, double& fn, double& fm);

// sum_{j=0}^{K-1} phi_j(u)^2, used for quadrature weights.
double hermite_sum_of_squares(int point_count, double u);

// 1D density-density overlap I(n, m) = integral phi_n^2 phi_m^2 dx in
// oscillator units, by Gauss-Hermite quadrature with 2(n+m)+2 points
// (exact for the integrand's polynomial degree). Symmetric in (n, m).
double overlap_1d_uncached(int n, int m);

// Memoized overlap, table keyed by (min, max). Thread-safe.
double overlap_1d(int n, int m);

}  // namespace chm

#endif

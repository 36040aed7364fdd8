#include "chm/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "chm/errors.hpp"

namespace chm {

namespace {

constexpr double kPiQuarterInv = 0.75112554446494248;  // pi^{-1/4}

// Eigenvalues of a symmetric tridiagonal matrix (implicit-shift QL,
// eigenvalues only). diag has n entries, off has n-1; both are clobbered.
void tridiag_eigenvalues(std::vector<double>& diag, std::vector<double>& off) {
  const int n = static_cast<int>(diag.size());
  off.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
        if (std::abs(off[m]) <= 1e-18 * dd) break;
      }
      if (m != l) {
        if (++iter == 60) throw NumericalError("tridiagonal QL failed to converge");
        double g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
        double r = std::hypot(g, 1.0);
        g = diag[m] - diag[l] + off[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * off[i];
          const double b = c * off[i];
          r = std::hypot(f, g);
          off[i + 1] = r;
          if (r == 0.0) {
            diag[i + 1] -= p;
            off[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = diag[i + 1] - p;
          r = (diag[i] - g) * s + 2.0 * c * b;
          p = s * r;
          diag[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        diag[l] -= p;
        off[l] = g;
        off[m] = 0.0;
      }
    } while (m != l);
  }
  off.pop_back();
  std::sort(diag.begin(), diag.end());
}

// Exponent-tracked recurrence for orthonormal Hermite functions
// phi_0 = pi^{-1/4} e^{-x^2/2}, phi_{j+1} = x sqrt(2/(j+1)) phi_j - sqrt(j/(j+1)) phi_{j-1}.
// Values are kept O(1) internally; `log_scale` holds the deferred exponent.
struct ScaledHermite {
  double prev;       // phi_{j-1} / e^{log_scale}
  double cur;        // phi_j     / e^{log_scale}
  double log_scale;  // natural log of the common scale factor
  int j;

  explicit ScaledHermite(double x) : prev(0.0), cur(kPiQuarterInv), log_scale(-0.5 * x * x), j(0) {}

  void advance(double x) {
    const double next = x * std::sqrt(2.0 / (j + 1)) * cur - std::sqrt(double(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
    ++j;
    const double mag = std::max(std::abs(prev), std::abs(cur));
    if (mag != 0.0 && mag < 1e-140) {
      prev *= 1e140;
      cur *= 1e140;
      log_scale -= std::log(1e140);
    } else if (mag > 1e140) {
      prev *= 1e-140;
      cur *= 1e-140;
      log_scale += std::log(1e140);
    }
  }

  double value() const {
    // exp underflows to 0 beyond the turning point, which is the true limit
    return cur == 0.0 ? 0.0 : cur * std::exp(log_scale);
  }
};

std::mutex g_rule_mutex;
std::map<int, GaussHermiteRule> g_rules;

std::mutex g_overlap_mutex;
std::unordered_map<std::uint64_t, double> g_overlaps;

GaussHermiteRule build_rule(int K) {
  // Jacobi matrix for Hermite: zero diagonal, off-diagonal sqrt(j/2).
  std::vector<double> diag(K, 0.0), off(K - 1);
  for (int j = 1; j < K; ++j) off[j - 1] = std::sqrt(0.5 * j);
  tridiag_eigenvalues(diag, off);

  GaussHermiteRule rule;
  rule.nodes.resize(K);
  rule.weights.resize(K);
  for (int k = 0; k < K; ++k) {
    double u = diag[k];
    // Newton polish on phi_K(u) = 0 using phi_K' = sqrt(2K) phi_{K-1} - u phi_K.
    for (int it = 0; it < 3; ++it) {
      ScaledHermite h(u);
      for (int j = 0; j < K; ++j) h.advance(u);
      const double fK = h.cur, fKm1 = h.prev;  // common scale cancels in the ratio
      const double d = std::sqrt(2.0 * K) * fKm1 - u * fK;
      if (d == 0.0) break;
      const double du = fK / d;
      u -= du;
      if (std::abs(du) < 1e-15 * (1.0 + std::abs(u))) break;
    }
    rule.nodes[k] = u;
    rule.weights[k] = 1.0 / hermite_sum_of_squares(K, u);
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int point_count) {
  if (point_count < 1) throw NumericalError("gauss_hermite needs at least one point");
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = g_rules.find(point_count);
  if (it == g_rules.end()) it = g_rules.emplace(point_count, build_rule(point_count)).first;
  return it->second;
}

void hermite_function_pair(int n, int m, double x, double& fn, double& fm) {
  const int hi = std::max(n, m);
  ScaledHermite h(x);
  fn = fm = 0.0;
  if (n == 0) fn = h.value();
  if (m == 0) fm = h.value();
  for (int j = 1; j <= hi; ++j) {
    h.advance(x);
    if (j == n) fn = h.value();
    if (j == m) fm = h.value();
  }
}

double hermite_sum_of_squares(int point_count, double u) {
  ScaledHermite h(u);
  double sum = 0.0;
  for (int j = 0; j < point_count; ++j) {
    const double v = h.value();
    sum += v * v;
    h.advance(u);
  }
  return sum;
}

double overlap_1d_uncached(int n, int m) {
  if (n < 0 || m < 0) throw NumericalError("overlap_1d requires nonnegative mode indices");
  const int K = 2 * (n + m) + 2;
  const GaussHermiteRule& rule = gauss_hermite(K);
  // I = 2^{-1/2} sum_k (w_k e^{u_k^2}) phi_n(x_k)^2 phi_m(x_k)^2, x_k = u_k / sqrt(2)
  const double inv_sqrt2 = 0.70710678118654752;
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    const double x = rule.nodes[k] * inv_sqrt2;
    double fn, fm;
    hermite_function_pair(n, m, x, fn, fm);
    sum += rule.weights[k] * fn * fn * fm * fm;
  }
  return sum * inv_sqrt2;
}

double overlap_1d(int n, int m) {
  const std::uint64_t lo = static_cast<std::uint64_t>(std::min(n, m));
  const std::uint64_t hi = static_cast<std::uint64_t>(std::max(n, m));
  const std::uint64_t key = (lo << 32) | hi;
  {
    std::lock_guard<std::mutex> lock(g_overlap_mutex);
    auto it = g_overlaps.find(key);
    if (it != g_overlaps.end()) return it->second;
  }
  const double value = overlap_1d_uncached(n, m);
  std::lock_guard<std::mutex> lock(g_overlap_mutex);
  g_overlaps.emplace(key, value);
  return value;
}

}  // namespace chm

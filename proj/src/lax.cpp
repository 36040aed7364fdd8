#include "chm/lax.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chm/errors.hpp"
#include "chm/optimize.hpp"

namespace chm {

namespace {

using CLD = std::complex<long double>;

// p(z) and p'(z) by simultaneous Horner; coeffs ascending, c.back() != 0.
void horner(const std::vector<long double>& c, const CLD& z, CLD& p, CLD& dp) {
  p = c.back();
  dp = 0.0L;
  for (long k = static_cast<long>(c.size()) - 2; k >= 0; --k) {
    dp = dp * z + p;
    p = p * z + c[k];
  }
}

// Greedy conjugate pairing: roots of a real polynomial must close under
// conjugation; average each root with the conjugate of its partner.
void enforce_conjugate_symmetry(std::vector<std::complex<double>>& roots, double im_floor) {
  std::vector<std::size_t> upper, lower;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (roots[i].imag() > im_floor)
      upper.push_back(i);
    else if (roots[i].imag() < -im_floor)
      lower.push_back(i);
    else
      roots[i] = {roots[i].real(), 0.0};
  }
  std::vector<bool> used(lower.size(), false);
  for (std::size_t iu : upper) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = lower.size();
    for (std::size_t k = 0; k < lower.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(std::conj(roots[iu]) - roots[lower[k]]);
      if (d < best) {
        best = d;
        pick = k;
      }
    }
    if (pick == lower.size()) continue;  // unmatched; leave as-is
    used[pick] = true;
    const std::complex<double> avg = 0.5 * (roots[iu] + std::conj(roots[lower[pick]]));
    roots[iu] = avg;
    roots[lower[pick]] = std::conj(avg);
  }
}

// Aberth-Ehrlich simultaneous iteration on a monic polynomial. Returns true
// on convergence; roots updated in place. Multiple roots stall at the
// intrinsic cluster radius, so stagnation at a small correction also counts
// as converged.
bool aberth(const std::vector<long double>& coeffs, std::vector<CLD>& z, int max_iter) {
  const std::size_t d = z.size();
  std::vector<CLD> w(d);
  long double worst = 1.0L;
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      CLD p, dp;
      horner(coeffs, z[i], p, dp);
      CLD ratio = (dp == CLD(0.0L)) ? CLD(1e-30L) : p / dp;
      CLD sum = 0.0L;
      for (std::size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        CLD diff = z[i] - z[j];
        if (std::abs(diff) < 1e-300L) diff = CLD(1e-300L);
        sum += CLD(1.0L) / diff;
      }
      w[i] = ratio / (CLD(1.0L) - ratio * sum);
    }
    worst = 0.0L;
    for (std::size_t i = 0; i < d; ++i) {
      z[i] -= w[i];
      const long double rel = std::abs(w[i]) / (1.0L + std::abs(z[i]));
      worst = std::max(worst, rel);
    }
    if (worst < 1e-14L) return true;
  }
  return worst < 1e-7L;
}

std::vector<CLD> companion_roots(const std::vector<long double>& coeffs) {
  const long d = static_cast<long>(coeffs.size()) - 1;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, d);
  for (long i = 1; i < d; ++i) M(i, i - 1) = 1.0;
  for (long i = 0; i < d; ++i) M(i, d - 1) = -static_cast<double>(coeffs[i]);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("companion-matrix eigensolver failed");
  std::vector<CLD> out(d);
  for (long i = 0; i < d; ++i)
    out[i] = CLD(solver.eigenvalues()[i].real(), solver.eigenvalues()[i].imag());
  return out;
}

template <typename T>
struct PolyBuilder {
  // prod_j (x - r_j), ascending coefficients
  static std::vector<T> product(const std::vector<T>& r) {
    std::vector<T> c{T(1)};
    for (const T& root : r) {
      c.push_back(T(0));
      for (long k = static_cast<long>(c.size()) - 1; k >= 1; --k)
        c[k] = c[k - 1] - root * c[k];
      c[0] = -root * c[0];
    }
    return c;
  }

  // Synthetic division of ascending-order p by (x - r); remainder discarded.
  static std::vector<T> deflate(const std::vector<T>& p, T r) {
    const std::size_t n = p.size();
    std::vector<T> q(n - 1);
    T carry = p[n - 1];
    for (long k = static_cast<long>(n) - 2; k >= 0; --k) {
      q[k] = carry;
      carry = p[k] + r * carry;
    }
    return q;
  }

  static std::vector<T> multiply(const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<T> c(a.size() + b.size() - 1, T(0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
  }
};

template <typename T>
std::vector<T> build_spectral_coeffs(const std::vector<T>& eps_scaled, T c_z,
                                     const SpinState& state) {
  using PB = PolyBuilder<T>;
  const std::size_t n = eps_scaled.size();
  const std::vector<T> full = PB::product(eps_scaled);  // degree n

  std::vector<T> px(n, T(0)), py(n, T(0)), pz(n, T(0));  // degree n-1 accumulators
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<T> dj = PB::deflate(full, eps_scaled[j]);
    const T sx = T(state.spins[j].x), sy = T(state.spins[j].y), sz = T(state.spins[j].z);
    for (std::size_t k = 0; k < n; ++k) {
      px[k] -= sx * dj[k];
      py[k] -= sy * dj[k];
      pz[k] -= sz * dj[k];
    }
  }
  // P_z picks up the (scale/J) * prod term of the Lax Z component.
  std::vector<T> pzfull(n + 1, T(0));
  for (std::size_t k = 0; k < n; ++k) pzfull[k] = pz[k];
  for (std::size_t k = 0; k <= n; ++k) pzfull[k] += c_z * full[k];

  std::vector<T> q = PB::multiply(px, px);
  {
    const std::vector<T> qy = PB::multiply(py, py);
    for (std::size_t k = 0; k < qy.size(); ++k) q[k] += qy[k];
  }
  std::vector<T> qz = PB::multiply(pzfull, pzfull);
  qz.resize(2 * n + 1, T(0));
  for (std::size_t k = 0; k < q.size(); ++k) qz[k] += q[k];
  // normalize to monic: leading coefficient is c_z^2
  const T lead = c_z * c_z;
  for (T& c : qz) c /= lead;
  qz.back() = T(1);
  return qz;
}

}  // namespace

std::complex<double> lax_square(std::complex<double> u, const std::vector<double>& fields,
                                double J, const SpinState& state) {
  if (J == 0.0) throw ConfigError("lax_square requires J != 0");
  if (fields.size() != state.spins.size())
    throw ConfigError("lax_square: fields/spins dimension mismatch");
  std::complex<double> lx = 0.0, ly = 0.0, lz = 1.0 / J;
  for (std::size_t j = 0; j < fields.size(); ++j) {
    const std::complex<double> den = u - 0.5 * fields[j];
    if (std::abs(den) == 0.0)
      throw NumericalError("lax_square evaluated at a pole u = h_j / 2");
    const std::complex<double> inv = 1.0 / den;
    lx -= state.spins[j].x * inv;
    ly -= state.spins[j].y * inv;
    lz -= state.spins[j].z * inv;
  }
  return lx * lx + ly * ly + lz * lz;
}

std::complex<double> SpectralPolynomial::to_physical(std::complex<long double> u_scaled) const {
  const std::complex<long double> u =
      u_scaled * static_cast<long double>(scale) + static_cast<long double>(shift);
  return {static_cast<double>(u.real()), static_cast<double>(u.imag())};
}

SpectralPolynomial spectral_polynomial(const std::vector<double>& fields, double J,
                                       const SpinState& state) {
  if (J == 0.0) throw ConfigError("spectral_polynomial requires J != 0");
  const std::size_t n = fields.size();
  if (n != state.spins.size())
    throw ConfigError("spectral_polynomial: fields/spins dimension mismatch");
  if (n < 1) throw ConfigError("spectral_polynomial: empty instance");

  // Center and scale eps_j = h_j/2 for conditioning; roots map back rigidly.
  double mean = 0.0;
  for (double h : fields) mean += 0.5 * h;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double h : fields) spread = std::max(spread, std::abs(0.5 * h - mean));
  const double j_scale = std::abs(J) * static_cast<double>(n);
  if (spread <= 0.0) spread = j_scale > 0.0 ? j_scale : 1.0;

  SpectralPolynomial poly;
  poly.shift = mean;
  poly.scale = spread;
  poly.extended = n > 200;

  if (poly.extended) {
    std::vector<long double> eps(n);
    for (std::size_t j = 0; j < n; ++j)
      eps[j] = (0.5L * static_cast<long double>(fields[j]) - static_cast<long double>(mean)) /
               static_cast<long double>(spread);
    const long double cz = static_cast<long double>(spread) / static_cast<long double>(J);
    poly.coeffs = build_spectral_coeffs<long double>(eps, cz, state);
  } else {
    std::vector<double> eps(n);
    for (std::size_t j = 0; j < n; ++j) eps[j] = (0.5 * fields[j] - mean) / spread;
    const std::vector<double> c = build_spectral_coeffs<double>(eps, spread / J, state);
    poly.coeffs.assign(c.begin(), c.end());
  }
  for (long double c : poly.coeffs) {
    if (!std::isfinite(c))
      throw NumericalError(
          "spectral polynomial coefficients overflow beyond the stability limit; "
          "rescale the fields or reduce N (extended precision engages above N = 200)");
  }
  return poly;
}

std::vector<std::complex<double>> find_polynomial_roots(const std::vector<long double>& coeffs) {
  if (coeffs.size() < 2) throw ConfigError("find_polynomial_roots: degree must be >= 1");
  std::vector<long double> c = coeffs;
  const long double lead = c.back();
  if (lead == 0.0L) throw ConfigError("find_polynomial_roots: zero leading coefficient");
  for (long double& v : c) v /= lead;

  const std::size_t d = c.size() - 1;
  // Cauchy-style radius bound for the initial circle.
  long double radius = 0.0L;
  for (std::size_t k = 0; k < d; ++k)
    radius = std::max(radius, std::abs(c[k]));
  radius = 1.0L + radius;
  radius = std::min(radius, 1e6L);

  std::vector<CLD> z(d);
  for (std::size_t i = 0; i < d; ++i) {
    const long double a = 6.283185307179586L * (static_cast<long double>(i) + 0.35L) /
                          static_cast<long double>(d);
    z[i] = CLD(radius * std::cos(a) * 0.7L, radius * std::sin(a) * 0.7L + 0.1L);
  }
  bool ok = aberth(c, z, 400);
  if (!ok) z = companion_roots(c);

  std::vector<std::complex<double>> out(d);
  for (std::size_t i = 0; i < d; ++i)
    out[i] = {static_cast<double>(z[i].real()), static_cast<double>(z[i].imag())};
  enforce_conjugate_symmetry(out, 0.0);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

namespace {

// Newton ratio Q/Q' of the spectral polynomial from the partial-fraction
// log-derivative, in the centered/scaled variable.
struct LaxNewtonRatio {
  std::vector<long double> eps;          // scaled eps'_j
  std::vector<std::array<long double, 3>> s;
  long double cz = 0.0L;                 // scale / J

  CLD operator()(const CLD& z) const {
    CLD lx = 0.0L, ly = 0.0L, lz = cz;
    CLD dx = 0.0L, dy = 0.0L, dz = 0.0L;
    CLD pole_sum = 0.0L;
    for (std::size_t j = 0; j < eps.size(); ++j) {
      CLD d = z - eps[j];
      const long double mag = std::abs(d);
      if (mag < 1e-30L) d = CLD(1e-30L);
      const CLD inv = CLD(1.0L) / d;
      const CLD inv2 = inv * inv;
      lx -= s[j][0] * inv;
      ly -= s[j][1] * inv;
      lz -= s[j][2] * inv;
      dx += s[j][0] * inv2;
      dy += s[j][1] * inv2;
      dz += s[j][2] * inv2;
      pole_sum += 2.0L * inv;
    }
    const CLD l2 = lx * lx + ly * ly + lz * lz;
    const CLD ldl = lx * dx + ly * dy + lz * dz;
    if (l2 == CLD(0.0L)) return CLD(0.0L);  // exactly on a root
    const CLD logq = pole_sum + 2.0L * ldl / l2;
    if (logq == CLD(0.0L)) return CLD(1e-30L);
    return CLD(1.0L) / logq;
  }
};

// Aberth-Ehrlich driven by a Newton-ratio functor (exact roots count d).
template <typename Ratio>
bool aberth_rational(const Ratio& ratio, std::vector<CLD>& z, int max_iter) {
  const std::size_t d = z.size();
  std::vector<CLD> w(d);
  std::vector<bool> done(d, false);
  long double worst = 1.0L;
  for (int it = 0; it < max_iter; ++it) {
    worst = 0.0L;
    for (std::size_t i = 0; i < d; ++i) {
      if (done[i]) continue;
      const CLD nr = ratio(z[i]);
      CLD sum = 0.0L;
      for (std::size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        CLD diff = z[i] - z[j];
        if (std::abs(diff) < 1e-300L) diff = CLD(1e-300L);
        sum += CLD(1.0L) / diff;
      }
      w[i] = nr / (CLD(1.0L) - nr * sum);
      z[i] -= w[i];
      const long double rel = std::abs(w[i]) / (1.0L + std::abs(z[i]));
      if (rel < 1e-16L)
        done[i] = true;
      else
        worst = std::max(worst, rel);
    }
    if (worst == 0.0L) return true;
  }
  return worst < 1e-7L;
}

}  // namespace

std::vector<std::complex<double>> find_roots(const std::vector<double>& fields, double J,
                                             const SpinState& state) {
  if (J == 0.0) throw ConfigError("find_roots requires J != 0");
  const std::size_t n = fields.size();
  if (n != state.spins.size()) throw ConfigError("find_roots: fields/spins dimension mismatch");

  double mean = 0.0;
  for (double h : fields) mean += 0.5 * h;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double h : fields) spread = std::max(spread, std::abs(0.5 * h - mean));
  const double j_scale = std::abs(J) * static_cast<double>(n);
  if (spread <= 0.0) spread = j_scale > 0.0 ? j_scale : 1.0;

  LaxNewtonRatio ratio;
  ratio.eps.resize(n);
  ratio.s.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    ratio.eps[j] = (0.5L * static_cast<long double>(fields[j]) - mean) / spread;
    ratio.s[j] = {static_cast<long double>(state.spins[j].x),
                  static_cast<long double>(state.spins[j].y),
                  static_cast<long double>(state.spins[j].z)};
  }
  ratio.cz = static_cast<long double>(spread) / static_cast<long double>(J);

  // Roots collapse onto the doubled eps_j as J -> 0; seed there, with
  // deterministic jitter so clustered fields do not collide.
  std::vector<CLD> z(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const long double jit = 0.03L * std::fmod(0.7548776662466927L * (j + 1), 1.0L);
    const long double im = 0.07L + jit;
    z[2 * j] = CLD(ratio.eps[j] + jit * 0.01L, im);
    z[2 * j + 1] = CLD(ratio.eps[j] + jit * 0.01L, -im);
  }
  bool ok = aberth_rational(ratio, z, 500);
  if (!ok) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      const long double a =
          6.283185307179586L * (static_cast<long double>(i) + 0.25L) / static_cast<long double>(z.size());
      z[i] = CLD(2.0L * std::cos(a), 2.0L * std::sin(a) + 0.05L);
    }
    ok = aberth_rational(ratio, z, 800);
  }
  if (!ok && n <= 200) {
    // companion-backed rescue on the scaled coefficients
    const SpectralPolynomial poly = spectral_polynomial(fields, J, state);
    auto scaled = find_polynomial_roots(poly.coeffs);
    for (auto& r : scaled)
      r = {r.real() * poly.scale + poly.shift, r.imag() * poly.scale};
    std::sort(scaled.begin(), scaled.end(), [](const auto& a, const auto& b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return scaled;
  }
  if (!ok)
    throw NumericalError("find_roots: Aberth iteration did not converge");

  std::vector<std::complex<double>> out(2 * n);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = {static_cast<double>(z[i].real() * spread + mean),
              static_cast<double>(z[i].imag() * spread)};
  enforce_conjugate_symmetry(out, 0.0);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

LaxSpectrum classify_phase(const std::vector<std::complex<double>>& roots, double epsilon_spread,
                           double pair_tolerance) {
  LaxSpectrum spec;
  spec.roots = roots;
  spec.pair_tolerance = pair_tolerance;
  spec.epsilon_spread = epsilon_spread;
  double max_im = 0.0;
  for (const auto& r : roots) {
    if (std::abs(r.imag()) > max_im) {
      max_im = std::abs(r.imag());
      spec.dominant_pair = {r.real(), std::abs(r.imag())};
    }
  }
  const double threshold = pair_tolerance * epsilon_spread;
  spec.phase = max_im > threshold ? LaxSpectrum::Phase::II : LaxSpectrum::Phase::I;
  spec.gap_estimate = spec.phase == LaxSpectrum::Phase::II ? 2.0 * max_im : 0.0;
  return spec;
}

double critical_coupling(double h_tilde, long n, const AnalyticParams& p) {
  if (n < 1) throw ConfigError("critical_coupling requires N >= 1");
  if (h_tilde < 0.0) throw ConfigError("critical_coupling requires h_tilde >= 0");
  return 2.0 * std::sqrt(3.0) * p.alpha * h_tilde / (p.beta * static_cast<double>(n) * M_PI);
}

double steady_magnetization_analytic(double h_tilde, long n, double J, const AnalyticParams& p) {
  if (J == 0.0) throw ConfigError("steady_magnetization_analytic requires J != 0");
  const double half_n = 0.5 * static_cast<double>(n);
  if (h_tilde == 0.0) return half_n;
  const double j_c = critical_coupling(h_tilde, n, p);
  if (std::abs(J) <= j_c) return 0.0;
  const double j_eff = p.beta * J;
  const double x = std::sqrt(3.0) * p.alpha * h_tilde / (static_cast<double>(n) * j_eff);
  const double s = half_n * x * (std::cos(x) / std::sin(x));
  return std::clamp(s, 0.0, half_n);
}

double gap_analytic(double h_tilde, long n, double J, const AnalyticParams& p) {
  if (J == 0.0) return 0.0;
  if (h_tilde > 0.0 && std::abs(J) <= critical_coupling(h_tilde, n, p)) return 0.0;
  return 2.0 * std::abs(p.beta * J) * steady_magnetization_analytic(h_tilde, n, J, p);
}

AnalyticParams fit_alpha_beta(const std::vector<double>& NJ, const std::vector<double>& Omega,
                              double h_tilde, long n, AnalyticParams initial) {
  if (NJ.size() != Omega.size() || NJ.size() < 2)
    throw ConfigError("fit_alpha_beta needs >= 2 matched (NJ, Omega) points");
  auto sse = [&](const std::vector<double>& logp) {
    const AnalyticParams p{std::exp(logp[0]), std::exp(logp[1])};
    double acc = 0.0;
    for (std::size_t i = 0; i < NJ.size(); ++i) {
      const double w = gap_analytic(h_tilde, n, NJ[i] / static_cast<double>(n), p);
      acc += (w - Omega[i]) * (w - Omega[i]);
    }
    return acc;
  };
  const NelderMeadResult r = nelder_mead(sse, {std::log(initial.alpha), std::log(initial.beta)},
                                         {0.4, 0.4}, 600, 1e-14);
  return {std::exp(r.x[0]), std::exp(r.x[1])};
}

}  // namespace chm

#include "chm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "chm/errors.hpp"
#include "chm/optimize.hpp"

namespace chm {

double free_dephasing_signal(const std::vector<double>& fields, double t) {
  double re = 0.0, im = 0.0;
  for (double h : fields) {
    re += std::cos(h * t);
    im += std::sin(h * t);
  }
  return 0.5 * std::sqrt(re * re + im * im);
}

std::vector<double> free_dephasing_signal(const std::vector<double>& fields,
                                          const std::vector<double>& times) {
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) out[k] = free_dephasing_signal(fields, times[k]);
  return out;
}

double chi2_distance(const TrajectoryRecord& traj, const std::vector<double>& reference,
                     const std::vector<double>& sigma) {
  if (traj.S.size() != reference.size())
    throw ConfigError("chi2_distance: trajectory and reference grids differ");
  if (!sigma.empty() && sigma.size() != reference.size())
    throw ConfigError("chi2_distance: sigma grid differs");
  double chi2 = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double s = sigma.empty() ? 1.0 : sigma[k];
    const double d = (traj.S[k] - reference[k]) / s;
    chi2 += d * d;
  }
  return chi2;
}

namespace {

// Dominant angular frequency of (S - mean) by direct spectrum scan.
double spectral_peak(const std::vector<double>& t, const std::vector<double>& s, double& power,
                     double& total_power) {
  const std::size_t n = t.size();
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(n);

  const double span = t.back() - t.front();
  const double dt_min = span / static_cast<double>(n - 1);
  const double w_lo = 2.0 * M_PI * 0.75 / span;          // below: indistinguishable from drift
  const double w_hi = M_PI / dt_min * 0.8;               // above: under-sampled
  const int n_freq = 1024;

  double best_w = w_lo, best_p = -1.0;
  total_power = 0.0;
  for (int k = 0; k < n_freq; ++k) {
    const double w = w_lo + (w_hi - w_lo) * static_cast<double>(k) / (n_freq - 1);
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      re += (s[i] - mean) * std::cos(w * t[i]);
      im += (s[i] - mean) * std::sin(w * t[i]);
    }
    const double p = re * re + im * im;
    total_power += p;
    if (p > best_p) {
      best_p = p;
      best_w = w;
    }
  }
  power = best_p;
  total_power /= static_cast<double>(n_freq);
  return best_w;
}

struct LateFit {
  double sse = 0.0;
  double s_inf = 0.0;
  double q = 0.0;  // sine amplitude; cosine amplitude is pinned by continuity
  long points = 0;
};

// For t >= t_c the model is
//   S(t) = S_inf + (S_free(t_c) - S_inf) E_c + Q E_s,
//   E_c = e^{-kappa (t-t_c)} cos(Omega (t-t_c)),  E_s = likewise with sin,
// which is linear in (S_inf, Q) once (t_c, kappa, Omega) are fixed.
LateFit solve_late(const std::vector<double>& t, const std::vector<double>& s, double s_free_tc,
                   double t_c, double kappa, double omega) {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  long m = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_c) continue;
    const double dt = t[k] - t_c;
    const double env = std::exp(-kappa * dt);
    const double ec = env * std::cos(omega * dt);
    const double es = env * std::sin(omega * dt);
    const double u = 1.0 - ec;
    const double y = s[k] - s_free_tc * ec;
    a11 += u * u;
    a12 += u * es;
    a22 += es * es;
    b1 += u * y;
    b2 += es * y;
    ++m;
  }
  LateFit out;
  out.points = m;
  if (m < 4) {
    out.sse = 1e300;
    return out;
  }
  const double det = a11 * a22 - a12 * a12;
  if (std::abs(det) < 1e-14 * (std::abs(a11 * a22) + 1.0)) {
    // degenerate basis (e.g. omega ~ 0): fall back to the mean level
    out.s_inf = b1 / std::max(a11, 1e-300);
    out.q = 0.0;
  } else {
    out.s_inf = (b1 * a22 - b2 * a12) / det;
    out.q = (a11 * b2 - a12 * b1) / det;
  }
  double sse = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_c) continue;
    const double dt = t[k] - t_c;
    const double env = std::exp(-kappa * dt);
    const double ec = env * std::cos(omega * dt);
    const double es = env * std::sin(omega * dt);
    const double model = out.s_inf + (s_free_tc - out.s_inf) * ec + out.q * es;
    sse += (s[k] - model) * (s[k] - model);
  }
  out.sse = sse;
  return out;
}

}  // namespace

GapFit fit_gap(const TrajectoryRecord& traj, const std::vector<double>& fields) {
  const std::vector<double>& t = traj.times;
  const std::vector<double>& s = traj.S;
  if (t.size() < 16) throw ConfigError("fit_gap: too few samples");
  const double span = t.back() - t.front();

  GapFit fit;
  double peak_power = 0.0, mean_power = 0.0;
  const double w0 = spectral_peak(t, s, peak_power, mean_power);

  const std::vector<double> s_free = free_dephasing_signal(fields, t);

  // Early-time residuals against S_{J=0} depend only on t_c.
  auto early_sse = [&](double t_c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] >= t_c) break;
      acc += (s[k] - s_free[k]) * (s[k] - s_free[k]);
    }
    return acc;
  };

  auto objective = [&](double t_c, double kappa, double omega) {
    const double sf = free_dephasing_signal(fields, t_c);
    const LateFit lf = solve_late(t, s, sf, t_c, kappa, omega);
    return early_sse(t_c) + lf.sse;
  };

  // Coarse grid, then simplex polish on (t_c, log kappa, Omega).
  double best = 1e300;
  double bt = t.front(), bk = 1.0 / span, bw = w0;
  for (int i = 0; i <= 8; ++i) {
    const double t_c = t.front() + 0.5 * span * static_cast<double>(i) / 8.0;
    for (double kappa : {0.25 / span, 1.0 / span, 4.0 / span, 16.0 / span}) {
      for (double w : {0.8 * w0, w0, 1.2 * w0}) {
        const double sse = objective(t_c, kappa, w);
        if (sse < best) {
          best = sse;
          bt = t_c;
          bk = kappa;
          bw = w;
        }
      }
    }
  }

  auto nm_obj = [&](const std::vector<double>& x) {
    const double t_c = std::clamp(x[0], t.front(), t.front() + 0.75 * span);
    const double kappa = std::exp(std::clamp(x[1], std::log(1e-3 / span), std::log(1e3 / span)));
    const double omega = std::abs(x[2]);
    return objective(t_c, kappa, omega);
  };
  NelderMeadResult nm = nelder_mead(nm_obj, {bt, std::log(bk), bw},
                                    {0.05 * span, 0.5, 0.05 * bw + 1e-12}, 500, 1e-13);
  const double t_c = std::clamp(nm.x[0], t.front(), t.front() + 0.75 * span);
  const double kappa = std::exp(std::clamp(nm.x[1], std::log(1e-3 / span), std::log(1e3 / span)));
  const double omega = std::abs(nm.x[2]);
  const double sf = free_dephasing_signal(fields, t_c);
  const LateFit lf = solve_late(t, s, sf, t_c, kappa, omega);

  fit.Omega = omega;
  fit.damping = kappa;
  fit.S_infinity = lf.s_inf;
  fit.crossover_time = t_c;
  const double p_amp = sf - lf.s_inf;
  fit.amplitude = std::hypot(p_amp, lf.q);
  fit.phase = std::atan2(-lf.q, p_amp);
  fit.residual = std::sqrt(nm.value / static_cast<double>(t.size()));

  // An oscillation must carry a detectable amplitude and a spectrum peak
  // clearly above the background to count as converged.
  double smax = 0.0;
  for (double v : s) smax = std::max(smax, v);
  const bool has_peak = peak_power > 5.0 * mean_power;
  const bool has_amp = fit.amplitude > 1e-4 * smax;
  fit.converged = has_peak && has_amp && omega > 0.0;
  if (!fit.converged) fit.Omega = 0.0;
  return fit;
}

double steady_state_average(const std::vector<double>& times, const std::vector<double>& S,
                            double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction < 1.0))
    throw ConfigError("steady_state_average: window_fraction must lie in (0,1)");
  if (times.empty()) throw ConfigError("steady_state_average: empty record");
  const double t_lo = times.back() - window_fraction * (times.back() - times.front());
  double acc = 0.0;
  long m = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_lo) continue;
    acc += S[k];
    ++m;
  }
  return acc / static_cast<double>(m);
}

double steady_state_average(const TrajectoryRecord& traj, double window_fraction) {
  return steady_state_average(traj.times, traj.S, window_fraction);
}

}  // namespace chm

#include "chm/ramsey.hpp"

#include <algorithm>
#include <cmath>

#include "chm/errors.hpp"
#include "chm/rng.hpp"

namespace chm {

ShotRecord simulate_shots(double S_perp_norm, long atoms, long n_shots, double noise_sigma,
                          std::uint64_t seed) {
  if (!(S_perp_norm >= 0.0 && S_perp_norm <= 1.0))
    throw ConfigError("simulate_shots: S_perp_norm must lie in [0, 1]");
  if (atoms < 1) throw ConfigError("simulate_shots: atoms must be >= 1");
  if (n_shots < 1) throw ConfigError("simulate_shots: n_shots must be >= 1");

  ShotRecord rec;
  rec.atoms_per_shot = atoms;
  rec.noise_sigma = noise_sigma;
  rec.seed = seed;
  rec.hidden_phases.reserve(n_shots);
  rec.fractions_up.reserve(n_shots);

  Rng rng(seed);
  for (long k = 0; k < n_shots; ++k) {
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    const double p = 0.5 * (1.0 + S_perp_norm * std::cos(phi));
    double f = static_cast<double>(rng.binomial(atoms, p)) / static_cast<double>(atoms);
    if (noise_sigma > 0.0) f += noise_sigma * rng.normal();
    rec.hidden_phases.push_back(phi);
    rec.fractions_up.push_back(std::clamp(f, 0.0, 1.0));
  }
  return rec;
}

namespace {

constexpr int kPhaseNodes = 256;

// Marginal log-likelihood of the record at amplitude A.
double log_likelihood(const ShotRecord& rec, double A) {
  const double inv_atoms = 1.0 / static_cast<double>(rec.atoms_per_shot);
  const double tech2 = rec.noise_sigma * rec.noise_sigma;

  double mean[kPhaseNodes], var[kPhaseNodes];
  for (int j = 0; j < kPhaseNodes; ++j) {
    const double phi = 2.0 * M_PI * (static_cast<double>(j) + 0.5) / kPhaseNodes;
    const double p = 0.5 * (1.0 + A * std::cos(phi));
    mean[j] = p;
    var[j] = std::max(tech2 + p * (1.0 - p) * inv_atoms, 1e-12);
  }

  double ll = 0.0;
  for (double f : rec.fractions_up) {
    // log of the phase average with the per-shot max factored out
    double max_e = -1e300;
    double expo[kPhaseNodes];
    for (int j = 0; j < kPhaseNodes; ++j) {
      const double d = f - mean[j];
      expo[j] = -0.5 * d * d / var[j] - 0.5 * std::log(var[j]);
      max_e = std::max(max_e, expo[j]);
    }
    double acc = 0.0;
    for (int j = 0; j < kPhaseNodes; ++j) acc += std::exp(expo[j] - max_e);
    ll += max_e + std::log(acc / kPhaseNodes);
  }
  return ll;
}

}  // namespace

MleEstimate mle_amplitude(const ShotRecord& record) {
  if (record.fractions_up.size() < 2)
    throw ConfigError("mle_amplitude requires at least 2 shots");

  MleEstimate est;

  // Degenerate record: identical fractions and no noise model to explain them.
  double fmin = 1.0, fmax = 0.0;
  for (double f : record.fractions_up) {
    fmin = std::min(fmin, f);
    fmax = std::max(fmax, f);
  }
  const double sigma_floor =
      std::sqrt(record.noise_sigma * record.noise_sigma +
                0.25 / static_cast<double>(record.atoms_per_shot));
  if (fmax - fmin < 1e-15 && sigma_floor < 1e-9) {
    est.amplitude = std::clamp(std::abs(2.0 * fmin - 1.0), 0.0, 1.0);
    est.ci_low = est.ci_high = est.amplitude;
    est.degenerate = true;
    est.log_likelihood = 0.0;
    return est;
  }

  // Bracketing grid, then golden-section refinement.
  const int n_grid = 65;
  double best_a = 0.0, best_ll = -1e300;
  for (int k = 0; k < n_grid; ++k) {
    const double a = static_cast<double>(k) / (n_grid - 1);
    const double ll = log_likelihood(record, a);
    if (ll > best_ll) {
      best_ll = ll;
      best_a = a;
    }
  }
  double lo = std::max(0.0, best_a - 1.0 / (n_grid - 1));
  double hi = std::min(1.0, best_a + 1.0 / (n_grid - 1));
  const double gr = 0.61803398874989485;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = log_likelihood(record, x1), f2 = log_likelihood(record, x2);
  for (int it = 0; it < 60 && hi - lo > 1e-7; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = log_likelihood(record, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = log_likelihood(record, x1);
    }
  }
  const double a_hat = 0.5 * (lo + hi);
  const double ll_hat = log_likelihood(record, a_hat);

  // Curvature of the log-likelihood for the confidence interval.
  const double da = 1e-3;
  const double a_p = std::min(1.0, a_hat + da);
  const double a_m = std::max(0.0, a_hat - da);
  const double d2 = (log_likelihood(record, a_p) - 2.0 * ll_hat + log_likelihood(record, a_m)) /
                    ((a_p - a_hat) * (a_hat - a_m));
  double se = d2 < 0.0 ? 1.0 / std::sqrt(-d2) : 1.0;

  est.amplitude = a_hat;
  est.log_likelihood = ll_hat;
  est.ci_low = std::max(0.0, a_hat - 1.96 * se);
  est.ci_high = std::min(1.0, a_hat + 1.96 * se);
  return est;
}

}  // namespace chm

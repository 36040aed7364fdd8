#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "chm/errors.hpp"
#include "chm/ramsey.hpp"
#include "chm/rng.hpp"

using namespace chm;

namespace {

// two-sample Kolmogorov-Smirnov statistic
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

ShotRecord record_from_phases(const std::vector<double>& phases, double A, double sigma,
                              Rng& noise_rng) {
  ShotRecord rec;
  rec.atoms_per_shot = 1000000;
  rec.noise_sigma = sigma;
  for (double phi : phases) {
    const double f = 0.5 * (1.0 + A * std::cos(phi)) + sigma * noise_rng.normal();
    rec.hidden_phases.push_back(phi);
    rec.fractions_up.push_back(std::clamp(f, 0.0, 1.0));
  }
  return rec;
}

}  // namespace

TEST_CASE("shot simulation limits") {
  // zero transverse magnetization, no technical noise, many atoms: f ~ 1/2
  const ShotRecord zero = simulate_shots(0.0, 2000000, 50, 0.0, 9);
  for (double f : zero.fractions_up) CHECK(std::abs(f - 0.5) < 5e-3);

  // full contrast, no technical noise: f follows (1 + cos phi)/2
  const ShotRecord full = simulate_shots(1.0, 4000000, 60, 0.0, 10);
  for (std::size_t kk = 0; kk < full.fractions_up.size(); ++kk) {
    const double expect = 0.5 * (1.0 + std::cos(full.hidden_phases[kk]));
    CHECK(std::abs(full.fractions_up[kk] - expect) < 5e-3);
  }
  double fmin = 1.0, fmax = 0.0;
  for (double f : full.fractions_up) {
    fmin = std::min(fmin, f);
    fmax = std::max(fmax, f);
  }
  CHECK(fmin < 0.05);
  CHECK(fmax > 0.95);

  // determinism in the seed
  const ShotRecord a = simulate_shots(0.4, 5000, 30, 0.02, 123);
  const ShotRecord b = simulate_shots(0.4, 5000, 30, 0.02, 123);
  CHECK(a.fractions_up == b.fractions_up);
  CHECK(a.hidden_phases == b.hidden_phases);
}

TEST_CASE("shot variance matches A^2/8 plus noise terms") {
  const double A = 0.6;
  const double sigma = 0.03;
  const long atoms = 100000;
  const ShotRecord rec = simulate_shots(A, atoms, 20000, sigma, 31);
  double mean = 0.0;
  for (double f : rec.fractions_up) mean += f;
  mean /= static_cast<double>(rec.fractions_up.size());
  double var = 0.0;
  for (double f : rec.fractions_up) var += (f - mean) * (f - mean);
  var /= static_cast<double>(rec.fractions_up.size());
  // Var f = A^2/8 + sigma^2 + E[p(1-p)]/atoms
  const double expected = A * A / 8.0 + sigma * sigma + 0.25 / atoms;
  CHECK(var == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("MLE recovers the amplitude at 40 shots") {
  int hits = 0;
  const int trials = 25;
  double abs_err = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ShotRecord rec = simulate_shots(0.5, 1000000, 40, 0.05, 1000 + t);
    const MleEstimate est = mle_amplitude(rec);
    if (est.ci_low <= 0.5 && 0.5 <= est.ci_high) ++hits;
    abs_err += std::abs(est.amplitude - 0.5);
  }
  CHECK(abs_err / trials < 0.05);
  CHECK(hits >= 20);  // CI coverage clearly above chance
}

TEST_CASE("flat fractions estimate near zero") {
  ShotRecord rec;
  rec.atoms_per_shot = 1000000;
  rec.noise_sigma = 0.05;
  rec.seed = 0;
  for (int kk = 0; kk < 40; ++kk) {
    rec.hidden_phases.push_back(0.1 * kk);
    rec.fractions_up.push_back(0.5);
  }
  const MleEstimate est = mle_amplitude(rec);
  CHECK(!est.degenerate);
  CHECK(est.amplitude < 0.1);  // small positive bias floor allowed
}

TEST_CASE("degenerate likelihood returns a flagged boundary estimate") {
  ShotRecord rec;
  rec.atoms_per_shot = 1000000000000000000L;  // effectively no projection noise
  rec.noise_sigma = 0.0;
  for (int kk = 0; kk < 10; ++kk) {
    rec.hidden_phases.push_back(0.0);
    rec.fractions_up.push_back(0.75);
  }
  const MleEstimate est = mle_amplitude(rec);
  CHECK(est.degenerate);
  CHECK(est.amplitude == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("estimator consistency: bias below 0.01 at 1000 shots") {
  for (double A : {0.2, 0.5, 0.9}) {
    double mean_est = 0.0;
    const int records = 12;
    for (int r = 0; r < records; ++r) {
      const ShotRecord rec =
          simulate_shots(A, 1000000, 1000, 0.05, derive_seed(77, 100 * r + int(A * 10)));
      mean_est += mle_amplitude(rec).amplitude;
    }
    mean_est /= records;
    CAPTURE(A);
    CHECK(std::abs(mean_est - A) < 0.01);
  }
}

TEST_CASE("estimate distribution is invariant under a global phase shift") {
  Rng phase_rng(55);
  Rng noise_rng1(66), noise_rng2(66);
  std::vector<double> est_base, est_shift;
  const double A = 0.55, sigma = 0.04, shift = 1.234;
  for (int r = 0; r < 120; ++r) {
    std::vector<double> phases(24);
    for (double& p : phases) p = phase_rng.uniform(0.0, 2.0 * M_PI);
    est_base.push_back(mle_amplitude(record_from_phases(phases, A, sigma, noise_rng1)).amplitude);
    for (double& p : phases) p = std::fmod(p + shift, 2.0 * M_PI);
    est_shift.push_back(mle_amplitude(record_from_phases(phases, A, sigma, noise_rng2)).amplitude);
  }
  const double d = ks_statistic(est_base, est_shift);
  // K-S critical value at alpha = 0.01 for n = m = 120
  CHECK(d < 1.63 * std::sqrt(2.0 / 120.0));
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(simulate_shots(1.5, 100, 10, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(simulate_shots(0.5, 0, 10, 0.0, 1), ConfigError);
  ShotRecord rec;
  rec.fractions_up = {0.5};
  rec.atoms_per_shot = 10;
  CHECK_THROWS_AS(mle_amplitude(rec), ConfigError);
}

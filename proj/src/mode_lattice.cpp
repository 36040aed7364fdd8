#include "chm/mode_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "chm/constants.hpp"
#include "chm/errors.hpp"
#include "chm/oscillator.hpp"
#include "chm/rng.hpp"

namespace chm {

namespace {

struct Candidate {
  ModeIndex n;
  double energy;  // J
};

// All modes with E = hbar (n . omega) < E_cut, in a deterministic order.
std::vector<Candidate> enumerate_modes(const TrapConfig& trap, double E_cut) {
  std::vector<Candidate> out;
  const double ex = constants::hbar * trap.omega[0];
  const double ey = constants::hbar * trap.omega[1];
  const double ez = constants::hbar * trap.omega[2];
  const int nx_max = static_cast<int>(E_cut / ex);
  for (int nx = 0; nx <= nx_max; ++nx) {
    const double Ex = nx * ex;
    if (Ex >= E_cut) break;
    const int ny_max = static_cast<int>((E_cut - Ex) / ey);
    for (int ny = 0; ny <= ny_max; ++ny) {
      const double Exy = Ex + ny * ey;
      if (Exy >= E_cut) break;
      const int nz_max = static_cast<int>((E_cut - Exy) / ez);
      for (int nz = 0; nz <= nz_max; ++nz) {
        const double E = Exy + nz * ez;
        if (E >= E_cut) break;
        out.push_back({{nx, ny, nz}, E});
      }
    }
  }
  return out;
}

double fermi_dirac(double E, double mu, double kT) {
  const double x = (E - mu) / kT;
  if (x > 700.0) return 0.0;
  if (x < -700.0) return 1.0;
  return 1.0 / (std::exp(x) + 1.0);
}

double expected_number(const std::vector<Candidate>& modes, double mu, double kT) {
  double sum = 0.0;
  for (const auto& c : modes) sum += fermi_dirac(c.energy, mu, kT);
  return sum;
}

ModeSet sample_once(const TrapConfig& trap, long target_N, double T_over_TF,
                    std::uint64_t seed) {
  const double EF = fermi_energy(target_N, trap);
  const double kT = T_over_TF * EF;
  double E_cut = EF + 12.0 * kT;

  std::vector<Candidate> candidates = enumerate_modes(trap, E_cut);
  // The continuum E_F can undercount discrete states; widen once before
  // declaring the cutoff exhausted.
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (expected_number(candidates, E_cut, kT) >= static_cast<double>(target_N)) break;
    E_cut *= 1.25;
    candidates = enumerate_modes(trap, E_cut);
  }

  // Bisection for mu: expected_number is increasing in mu.
  double lo = -50.0 * kT;
  double hi = E_cut;
  if (expected_number(candidates, lo, kT) > static_cast<double>(target_N))
    lo = -E_cut - 50.0 * kT;
  if (expected_number(candidates, hi, kT) < static_cast<double>(target_N))
    throw ConfigError("mode cutoff exhausted before the chemical potential brackets target_N");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_number(candidates, mid, kT) < static_cast<double>(target_N))
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16 * std::max(std::abs(hi), kT)) break;
  }
  const double mu = 0.5 * (lo + hi);

  ModeSet ms;
  ms.trap = trap;
  ms.temperature = T_over_TF;
  ms.target_N = target_N;
  ms.chemical_potential = mu;
  ms.seed = seed;

  Rng rng(seed);
  for (const auto& c : candidates) {
    if (rng.bernoulli(fermi_dirac(c.energy, mu, kT))) {
      ms.modes.push_back(c.n);
      ms.fields.push_back(axial_field(c.n, trap.delta_omega));
    }
  }
  ms.realized_N = static_cast<long>(ms.modes.size());
  return ms;
}

}  // namespace

void ModeSet::validate() const {
  if (fields.size() != modes.size())
    throw InvariantError("ModeSet: fields and modes sizes differ");
  if (realized_N != static_cast<long>(modes.size()))
    throw InvariantError("ModeSet: realized_N does not match mode count");
  std::set<ModeIndex> seen;
  double mean_shift = 0.0;
  if (centered_fields) {
    for (std::size_t i = 0; i < modes.size(); ++i)
      mean_shift += axial_field(modes[i], trap.delta_omega);
    mean_shift /= static_cast<double>(modes.size());
  }
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& n = modes[i];
    if (n[0] < 0 || n[1] < 0 || n[2] < 0)
      throw InvariantError("ModeSet: negative mode index");
    if (!seen.insert(n).second)
      throw InvariantError("ModeSet: duplicate mode (double occupancy)");
    const double h = axial_field(n, trap.delta_omega) - mean_shift;
    if (fields[i] != h)
      throw InvariantError("ModeSet: field does not equal 2 n . delta_omega at index " +
                           std::to_string(i));
  }
}

double axial_field(const ModeIndex& n, const std::array<double, 3>& delta_omega) {
  return 2.0 * (n[0] * delta_omega[0] + n[1] * delta_omega[1] + n[2] * delta_omega[2]);
}

ModeSet sample_occupied_modes(const TrapConfig& trap, long target_N, double T_over_TF,
                              std::uint64_t seed, const SamplingOptions& options) {
  if (target_N < 2) throw ConfigError("sample_occupied_modes requires target_N >= 2");
  if (!(T_over_TF > 0.0 && T_over_TF <= 1.0))
    throw ConfigError("sample_occupied_modes requires 0 < T_over_TF <= 1");

  ModeSet ms;
  const long tol = options.fixed_N ? std::max<long>(1, std::lround(0.02 * target_N))
                                   : std::numeric_limits<long>::max();
  for (int attempt = 0; attempt < std::max(1, options.max_resample); ++attempt) {
    ms = sample_once(trap, target_N, T_over_TF, derive_seed(seed, attempt));
    if (ms.realized_N >= 2 && std::abs(ms.realized_N - target_N) <= tol) {
      ms.seed = seed;
      if (options.center_fields) {
        double mean = 0.0;
        for (double h : ms.fields) mean += h;
        mean /= static_cast<double>(ms.fields.size());
        for (double& h : ms.fields) h -= mean;
        ms.centered_fields = true;
      }
      return ms;
    }
  }
  throw NumericalError(options.fixed_N
                           ? "sample_occupied_modes: fixed-N rejection did not converge"
                           : "sample_occupied_modes: realized_N < 2 after resampling");
}

double field_inhomogeneity(const ModeSet& ms) {
  if (ms.realized_N < 2) throw ConfigError("field_inhomogeneity requires realized_N >= 2");
  const double n = static_cast<double>(ms.fields.size());
  double mean = 0.0;
  for (double h : ms.fields) mean += h;
  mean /= n;
  double var = 0.0;
  for (double h : ms.fields) var += (h - mean) * (h - mean);
  return std::sqrt(var / n);
}

void rescale_fields(ModeSet& ms, double h_tilde_target) {
  const double current = field_inhomogeneity(ms);
  if (current == 0.0) throw NumericalError("rescale_fields: zero inhomogeneity, cannot scale");
  const double c = h_tilde_target / current;
  for (double& w : ms.trap.delta_omega) w *= c;
  double mean = 0.0;
  for (std::size_t i = 0; i < ms.modes.size(); ++i) {
    ms.fields[i] = axial_field(ms.modes[i], ms.trap.delta_omega);
    mean += ms.fields[i];
  }
  if (ms.centered_fields) {
    mean /= static_cast<double>(ms.fields.size());
    for (double& h : ms.fields) h -= mean;
  }
}

void CouplingMatrix::validate() const {
  if (static_cast<long>(factors.size()) != n * n)
    throw InvariantError("CouplingMatrix: size mismatch");
  for (long i = 0; i < n; ++i) {
    if (factor(i, i) != 0.0) throw InvariantError("CouplingMatrix: nonzero diagonal");
    for (long j = i + 1; j < n; ++j) {
      if (factor(i, j) != factor(j, i))
        throw InvariantError("CouplingMatrix: not bitwise symmetric");
      if (factor(i, j) < 0.0) throw InvariantError("CouplingMatrix: negative factor");
    }
  }
}

CouplingMatrix coupling_matrix(const ModeSet& ms, double scale_U, double rescale) {
  if (ms.realized_N < 2) throw ConfigError("coupling_matrix requires realized_N >= 2");
  const long n = ms.realized_N;
  CouplingMatrix cm;
  cm.n = n;
  cm.scale_U = scale_U;
  cm.rescale = rescale;
  cm.factors.assign(static_cast<std::size_t>(n) * n, 0.0);

  // Upper triangle, mirrored afterwards: symmetry holds bitwise and the
  // memoized 1D overlaps make assembly cheap.
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      const auto& a = ms.modes[i];
      const auto& b = ms.modes[j];
      const double f = overlap_1d(a[0], b[0]) * overlap_1d(a[1], b[1]) * overlap_1d(a[2], b[2]);
      cm.factors[i * n + j] = f;
    }
  }
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) cm.factors[j * n + i] = cm.factors[i * n + j];
  return cm;
}

double mean_factor(const CouplingMatrix& cm) {
  if (cm.n < 2) throw ConfigError("mean_factor requires N >= 2");
  double sum = 0.0;
  for (long i = 0; i < cm.n; ++i)
    for (long j = 0; j < cm.n; ++j) sum += cm.factor(i, j);
  return sum / (static_cast<double>(cm.n) * static_cast<double>(cm.n));
}

double mean_coupling(const CouplingMatrix& cm) {
  return cm.scale_U * cm.rescale * mean_factor(cm);
}

}  // namespace chm

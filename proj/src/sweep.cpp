#include "chm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "chm/errors.hpp"
#include "chm/fit.hpp"
#include "chm/rng.hpp"

namespace chm {

Instance build_thermal_instance(const TrapConfig& trap, long target_N, double T_over_TF,
                                std::uint64_t seed, double h_tilde_target, double NJ_target,
                                double rescale, const SamplingOptions& sampling) {
  Instance inst;
  inst.modes = sample_occupied_modes(trap, target_N, T_over_TF, seed, sampling);
  rescale_fields(inst.modes, h_tilde_target);
  inst.h_tilde = field_inhomogeneity(inst.modes);

  inst.couplings = coupling_matrix(inst.modes, 1.0, rescale);
  const double mf = mean_factor(inst.couplings);
  const double n = static_cast<double>(inst.modes.realized_N);
  const double U = NJ_target / (n * rescale * mf);
  inst.couplings.scale_U = U;
  inst.NJ = n * mean_coupling(inst.couplings);
  inst.a_a0 = U / interaction_scale(1.0, trap);
  return inst;
}

std::vector<double> uniform_grid_fields(long n, double h_tilde) {
  if (n < 2) throw ConfigError("uniform_grid_fields requires N >= 2");
  // population std of an N-point equally spaced grid on [-W, W] is
  // W sqrt((N+1) / (3 (N-1)))
  const double nn = static_cast<double>(n);
  const double W = h_tilde * std::sqrt(3.0 * (nn - 1.0) / (nn + 1.0));
  std::vector<double> fields(n);
  for (long k = 0; k < n; ++k)
    fields[k] = -W + 2.0 * W * static_cast<double>(k) / (nn - 1.0);
  return fields;
}

namespace {

SweepCell run_cell(double h_tilde, double NJ, std::uint64_t cell_seed,
                   const SweepOptions& opt) {
  SweepCell cell;
  cell.h_tilde = h_tilde;
  cell.NJ = NJ;
  cell.seed = cell_seed;

  const double horizon = opt.with_steady ? std::max(opt.steady_horizon, opt.readout_time)
                                         : opt.readout_time;
  std::vector<double> samples(opt.sample_count);
  for (int k = 0; k < opt.sample_count; ++k)
    samples[k] = horizon * static_cast<double>(k) / (opt.sample_count - 1);
  samples.push_back(opt.readout_time);

  EvolveOptions eopt;
  eopt.rtol = opt.rtol;
  eopt.atol = opt.atol;
  eopt.threads = 1;  // parallelism lives at the cell level

  TrajectoryRecord rec;
  double a_a0 = 0.0;
  if (opt.all_to_all_uniform) {
    const long n = opt.target_N;
    cell.realized_N = n;
    const std::vector<double> fields = uniform_grid_fields(n, h_tilde);
    const Coupling coupling = Coupling::uniform(NJ / static_cast<double>(n));
    SpinState st = init_polarized(n);
    apply_pulse_in_place(st, Vec3{0.0, 1.0, 0.0}, M_PI / 2.0);
    rec = evolve(st, fields, coupling, plain_schedule(horizon), samples, eopt);
  } else {
    const Instance inst = build_thermal_instance(opt.trap, opt.target_N, opt.T_over_TF, cell_seed,
                                                 h_tilde, NJ, opt.rescale);
    cell.realized_N = inst.modes.realized_N;
    a_a0 = inst.a_a0;
    SpinState st = init_polarized(inst.modes.realized_N);
    apply_pulse_in_place(st, Vec3{0.0, 1.0, 0.0}, M_PI / 2.0);
    rec = evolve(st, inst.modes.fields, Coupling::matrix(inst.couplings),
                 plain_schedule(horizon), samples, eopt);
  }
  if (opt.dephasing) rec = apply_dephasing(rec, a_a0, opt.Gamma0_inv_s, opt.gamma_inv_s);

  // exact sample at the readout time was appended above
  double s_read = 0.0;
  double best = 1e300;
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    const double d = std::abs(rec.times[k] - opt.readout_time);
    if (d < best) {
      best = d;
      s_read = rec.S[k];
    }
  }
  cell.S_readout = s_read;
  if (opt.with_steady) cell.S_steady = steady_state_average(rec, opt.window_fraction);
  return cell;
}

}  // namespace

SweepGrid sweep_phase_diagram(const std::vector<double>& h_tilde_axis,
                              const std::vector<double>& NJ_axis, const SweepOptions& options) {
  if (h_tilde_axis.empty() || NJ_axis.empty())
    throw ConfigError("sweep_phase_diagram: empty axis");

  SweepGrid grid;
  grid.h_tilde_axis = h_tilde_axis;
  grid.NJ_axis = NJ_axis;
  grid.readout_time = options.readout_time;
  grid.with_steady = options.with_steady;
  grid.cells.resize(h_tilde_axis.size() * NJ_axis.size());

  const std::size_t n_cells = grid.cells.size();
  int workers = options.workers > 0
                    ? options.workers
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::size_t>(workers, n_cells));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= n_cells) return;
      const std::size_t ih = idx / NJ_axis.size();
      const std::size_t ij = idx % NJ_axis.size();
      const std::uint64_t cell_seed = derive_seed(options.master_seed, idx);
      try {
        grid.cells[idx] = run_cell(h_tilde_axis[ih], NJ_axis[ij], cell_seed, options);
      } catch (const std::exception& e) {
        SweepCell cell;
        cell.h_tilde = h_tilde_axis[ih];
        cell.NJ = NJ_axis[ij];
        cell.seed = cell_seed;
        cell.failed = true;
        cell.error = e.what();
        grid.cells[idx] = cell;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return grid;
}

CriticalLine extract_critical_line(const SweepGrid& grid, double threshold, bool use_steady) {
  CriticalLine line;
  const std::size_t n_nj = grid.NJ_axis.size();

  for (std::size_t ih = 0; ih < grid.h_tilde_axis.size(); ++ih) {
    // positive-NJ branch, ascending
    std::vector<std::pair<double, double>> row;  // (NJ, S)
    for (std::size_t ij = 0; ij < n_nj; ++ij) {
      const SweepCell& c = grid.at(ih, ij);
      if (c.failed || grid.NJ_axis[ij] < 0.0) continue;
      row.emplace_back(grid.NJ_axis[ij], use_steady ? c.S_steady : c.S_readout);
    }
    std::sort(row.begin(), row.end());
    if (row.size() < 3) {
      line.rows_without_crossing.push_back(ih);
      continue;
    }
    const double plateau = row.back().second;
    const double level = threshold * plateau;
    bool found = false;
    for (std::size_t k = 0; k + 1 < row.size(); ++k) {
      if (row[k].second < level && row[k + 1].second >= level) {
        const double f = (level - row[k].second) / (row[k + 1].second - row[k].second);
        line.points.push_back({grid.h_tilde_axis[ih], row[k].first + f * (row[k + 1].first - row[k].first)});
        found = true;
        break;
      }
    }
    if (!found) line.rows_without_crossing.push_back(ih);
  }

  double num = 0.0, den = 0.0;
  for (const auto& p : line.points) {
    num += p.h_tilde * p.NJ_c;
    den += p.h_tilde * p.h_tilde;
  }
  line.slope = den > 0.0 ? num / den : 0.0;
  return line;
}

}  // namespace chm

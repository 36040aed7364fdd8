// Command-line driver: reproducible experiments over the simulator modules.
#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "chm/config.hpp"
#include "chm/constants.hpp"
#include "chm/errors.hpp"
#include "chm/fit.hpp"
#include "chm/io.hpp"
#include "chm/lax.hpp"
#include "chm/mode_lattice.hpp"
#include "chm/ramsey.hpp"
#include "chm/rng.hpp"
#include "chm/spin_dynamics.hpp"
#include "chm/sweep.hpp"

namespace {

using namespace chm;
using nlohmann::json;
namespace k = chm::constants;

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
};

RunConfig load_config(const CliOverrides& ov) {
  RunConfig cfg = ov.config_path.empty() ? RunConfig{} : RunConfig::load(ov.config_path);
  if (ov.seed_set) cfg.sampling.seed = ov.seed;
  if (!ov.out_dir.empty()) cfg.output.directory = ov.out_dir;
  if (ov.threads >= 0) cfg.threads = ov.threads;
  if (!ov.format.empty()) cfg.output.formats = {ov.format, "json"};
  if (ov.config_path.empty()) cfg.interaction.a_a0 = 10.0;
  cfg.validate();
  return cfg;
}

bool wants(const RunConfig& cfg, const std::string& fmt) {
  return std::find(cfg.output.formats.begin(), cfg.output.formats.end(), fmt) !=
         cfg.output.formats.end();
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output.directory) / name).string();
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
  write_text_file(out_path(cfg, name), j.dump(2) + "\n");
}

struct BuiltInstance {
  ModeSet modes;
  CouplingMatrix couplings;
  double a_a0 = 0.0;
  double NJ = 0.0;       // rad/s
  double h_tilde = 0.0;  // rad/s
};

BuiltInstance instance_from_config(const RunConfig& cfg) {
  BuiltInstance bi;
  SamplingOptions sopt;
  sopt.fixed_N = cfg.sampling.fixed_N;
  sopt.center_fields = cfg.sampling.center_fields;
  bi.modes = sample_occupied_modes(cfg.trap, cfg.sampling.target_N, cfg.sampling.T_over_TF,
                                   cfg.sampling.seed, sopt);
  bi.a_a0 = cfg.scattering_length_a0();
  const double U = interaction_scale(bi.a_a0, cfg.trap);
  bi.couplings = coupling_matrix(bi.modes, U, cfg.interaction.rescale);
  bi.NJ = static_cast<double>(bi.modes.realized_N) * mean_coupling(bi.couplings);
  bi.h_tilde = field_inhomogeneity(bi.modes);
  return bi;
}

PulseSchedule schedule_from_config(const RunConfig& cfg) {
  if (cfg.schedule.type == "echo")
    return echo_schedule(cfg.schedule.t_total_s, cfg.schedule.coupling_sign_first,
                         cfg.schedule.echo_residual_fraction);
  return plain_schedule(cfg.schedule.t_total_s, cfg.schedule.coupling_sign_first);
}

TrajectoryRecord evolve_from_config(const RunConfig& cfg, const BuiltInstance& bi) {
  SpinState st = init_polarized(bi.modes.realized_N);
  if (cfg.schedule.init_pulse == "pi2_y")
    apply_pulse_in_place(st, Vec3{0.0, 1.0, 0.0}, M_PI / 2.0);
  std::vector<double> samples(cfg.analysis.sample_count);
  for (int i = 0; i < cfg.analysis.sample_count; ++i)
    samples[i] =
        cfg.schedule.t_total_s * static_cast<double>(i) / (cfg.analysis.sample_count - 1);
  EvolveOptions eopt;
  eopt.rtol = cfg.analysis.rtol;
  eopt.atol = cfg.analysis.atol;
  eopt.threads = cfg.effective_threads();
  eopt.snapshot_stride = std::max(1, cfg.analysis.sample_count / 8);
  return evolve(st, bi.modes.fields, Coupling::matrix(bi.couplings), schedule_from_config(cfg),
                samples, eopt);
}

json instance_stats(const RunConfig& cfg, const BuiltInstance& bi) {
  return json{{"realized_N", bi.modes.realized_N},
              {"h_tilde_rad_s", bi.h_tilde},
              {"h_tilde_Hz", bi.h_tilde / k::two_pi},
              {"a_a0", bi.a_a0},
              {"scale_U_rad_s", bi.couplings.scale_U},
              {"rescale", bi.couplings.rescale},
              {"J_rad_s", bi.NJ / static_cast<double>(bi.modes.realized_N)},
              {"NJ_Hz", bi.NJ / k::two_pi},
              {"fermi_energy_J", fermi_energy(bi.modes.realized_N, cfg.trap)}};
}

int cmd_modes(const RunConfig& cfg) {
  const BuiltInstance bi = instance_from_config(cfg);
  bi.modes.validate();
  bi.couplings.validate();
  const std::string hash = config_hash(cfg);
  json meta = artifact_header("modes", hash, cfg.sampling.seed);
  meta["mode_set"] = modeset_to_json(bi.modes);
  meta["coupling"] = coupling_meta_json(bi.couplings);
  meta["stats"] = instance_stats(cfg, bi);
  write_json(cfg, "modes.json", meta);
  if (wants(cfg, "csv")) write_text_file(out_path(cfg, "coupling_factors.csv"),
                                         coupling_to_csv(bi.couplings));
  if (wants(cfg, "bin")) write_coupling_binary(out_path(cfg, "coupling_factors.bin"),
                                               bi.couplings);
  std::printf("modes: N = %ld, h~/2pi = %.4g Hz, NJ/2pi = %.4g Hz\n", bi.modes.realized_N,
              bi.h_tilde / k::two_pi, bi.NJ / k::two_pi);
  return kExitOk;
}

int cmd_evolve(const RunConfig& cfg) {
  const BuiltInstance bi = instance_from_config(cfg);
  TrajectoryRecord rec = evolve_from_config(cfg, bi);
  const std::string hash = config_hash(cfg);

  json meta = artifact_header("evolve", hash, cfg.sampling.seed);
  meta["instance"] = instance_stats(cfg, bi);
  meta["trajectory"] = trajectory_sidecar(rec);
  if (wants(cfg, "csv")) write_text_file(out_path(cfg, "trajectory.csv"), trajectory_to_csv(rec));
  if (cfg.dephasing.enabled) {
    TrajectoryRecord deph =
        apply_dephasing(rec, bi.a_a0, cfg.dephasing.Gamma0_inv_s, cfg.dephasing.gamma_inv_s);
    meta["dephased"] = trajectory_sidecar(deph);
    if (wants(cfg, "csv"))
      write_text_file(out_path(cfg, "trajectory_dephased.csv"), trajectory_to_csv(deph));
  }
  write_json(cfg, "trajectory.json", meta);
  std::printf("evolve: N = %ld, S(t_end)/(N/2) = %.6f\n", bi.modes.realized_N,
              rec.S.back() / (0.5 * static_cast<double>(bi.modes.realized_N)));
  return kExitOk;
}

int cmd_echo(const RunConfig& cfg) {
  RunConfig ecfg = cfg;
  ecfg.schedule.type = "echo";
  const BuiltInstance bi = instance_from_config(ecfg);
  TrajectoryRecord rec = evolve_from_config(ecfg, bi);
  if (ecfg.dephasing.enabled)
    rec = apply_dephasing(rec, std::abs(bi.a_a0), ecfg.dephasing.Gamma0_inv_s,
                          ecfg.dephasing.gamma_inv_s);
  const double s0 = rec.S.front();
  const double recovery = rec.S.back() / s0;
  const std::string hash = config_hash(ecfg);
  json meta = artifact_header("echo", hash, ecfg.sampling.seed);
  meta["instance"] = instance_stats(ecfg, bi);
  meta["trajectory"] = trajectory_sidecar(rec);
  meta["recovery_ratio"] = recovery;
  write_json(ecfg, "echo.json", meta);
  if (wants(ecfg, "csv"))
    write_text_file(out_path(ecfg, "echo_trajectory.csv"), trajectory_to_csv(rec));
  std::printf("echo: recovery S(T)/S(0+) = %.8f\n", recovery);
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
  SweepOptions opt;
  opt.trap = cfg.trap;
  opt.target_N = cfg.sampling.target_N;
  opt.T_over_TF = cfg.sampling.T_over_TF;
  opt.rescale = cfg.interaction.rescale;
  opt.readout_time = cfg.analysis.readout_time_s;
  opt.window_fraction = cfg.analysis.window_fraction;
  opt.rtol = cfg.analysis.rtol;
  opt.atol = cfg.analysis.atol;
  opt.workers = cfg.effective_threads();
  opt.all_to_all_uniform = cfg.sweep.all_to_all;
  opt.with_steady = cfg.sweep.with_steady;
  opt.steady_horizon = cfg.sweep.steady_horizon_s;
  opt.sample_count = cfg.sweep.sample_count;
  opt.dephasing = cfg.dephasing.enabled;
  opt.Gamma0_inv_s = cfg.dephasing.Gamma0_inv_s;
  opt.gamma_inv_s = cfg.dephasing.gamma_inv_s;
  opt.master_seed = cfg.sampling.seed;

  std::vector<double> h_axis, nj_axis;
  for (double h : cfg.sweep.h_tilde_Hz) h_axis.push_back(k::two_pi * h);
  for (double nj : cfg.sweep.NJ_Hz) nj_axis.push_back(k::two_pi * nj);

  const SweepGrid grid = sweep_phase_diagram(h_axis, nj_axis, opt);
  const CriticalLine line =
      extract_critical_line(grid, cfg.sweep.threshold, cfg.sweep.with_steady);

  const std::string hash = config_hash(cfg);
  json meta = artifact_header("sweep", hash, cfg.sampling.seed);
  meta["readout_time_s"] = grid.readout_time;
  meta["threshold"] = cfg.sweep.threshold;
  meta["critical_slope_NJc_over_h"] = line.slope;
  long failures = 0;
  for (const auto& c : grid.cells)
    if (c.failed) ++failures;
  meta["failed_cells"] = failures;
  write_json(cfg, "sweep.json", meta);
  if (wants(cfg, "csv")) {
    write_text_file(out_path(cfg, "sweep.csv"), sweep_to_csv(grid));
    write_text_file(out_path(cfg, "critical_line.csv"), critical_line_to_csv(line));
  }
  std::printf("sweep: %zu cells, %ld failures, boundary slope NJc/h~ = %.4f\n",
              grid.cells.size(), failures, line.slope);
  return failures == 0 ? kExitOk : kExitNumericalError;
}

int cmd_lax(const RunConfig& cfg) {
  const BuiltInstance bi = instance_from_config(cfg);
  const long n = bi.modes.realized_N;
  const double J_uniform = bi.NJ / static_cast<double>(n);
  if (J_uniform == 0.0)
    throw ConfigError("lax: the configured interaction gives J = 0; the Lax analysis needs J != 0");

  SpinState st = init_polarized(n);
  apply_pulse_in_place(st, Vec3{0.0, 1.0, 0.0}, M_PI / 2.0);

  const SpectralPolynomial poly = spectral_polynomial(bi.modes.fields, J_uniform, st);
  const auto roots = find_roots(bi.modes.fields, J_uniform, st);
  double mean_eps = 0.0;
  for (double h : bi.modes.fields) mean_eps += 0.5 * h;
  mean_eps /= static_cast<double>(n);
  double spread = 0.0;
  for (double h : bi.modes.fields) spread = std::max(spread, std::abs(0.5 * h - mean_eps));
  const LaxSpectrum spec = classify_phase(roots, spread, cfg.analysis.pair_tolerance);

  const std::string hash = config_hash(cfg);
  json meta = artifact_header("lax", hash, cfg.sampling.seed);
  meta["instance"] = instance_stats(cfg, bi);
  meta["all_to_all_J_rad_s"] = J_uniform;
  meta["spectrum"] = lax_to_json(spec);
  write_json(cfg, "lax.json", meta);

  // Analytic curves over the configured NJ scan.
  const AnalyticParams params{cfg.analysis.alpha, cfg.analysis.beta};
  std::string csv = "NJ_Hz,S_inf_norm,Omega_Hz,NJc_Hz\n";
  const double njc = static_cast<double>(n) * critical_coupling(bi.h_tilde, n, params);
  for (double nj_hz : cfg.sweep.NJ_Hz) {
    const double J = k::two_pi * nj_hz / static_cast<double>(n);
    const double s_inf =
        J == 0.0 ? 0.0
                 : steady_magnetization_analytic(bi.h_tilde, n, J, params) / (0.5 * n);
    const double omega = J == 0.0 ? 0.0 : gap_analytic(bi.h_tilde, n, J, params);
    csv += format_double(nj_hz) + "," + format_double(s_inf) + "," +
           format_double(omega / k::two_pi) + "," + format_double(njc / k::two_pi) + "\n";
  }
  if (wants(cfg, "csv")) write_text_file(out_path(cfg, "analytic_curves.csv"), csv);
  std::printf("lax: phase %s, gap/2pi = %.4g Hz (pair tol %.1e)\n",
              spec.phase == LaxSpectrum::Phase::II ? "II" : "I",
              spec.gap_estimate / k::two_pi, spec.pair_tolerance);
  return kExitOk;
}

int cmd_fit(const RunConfig& cfg) {
  const BuiltInstance bi = instance_from_config(cfg);
  TrajectoryRecord rec = evolve_from_config(cfg, bi);
  const GapFit fit = fit_gap(rec, bi.modes.fields);
  const std::vector<double> ref = free_dephasing_signal(bi.modes.fields, rec.times);
  const double chi2 = chi2_distance(rec, ref);

  const std::string hash = config_hash(cfg);
  json meta = artifact_header("fit", hash, cfg.sampling.seed);
  meta["instance"] = instance_stats(cfg, bi);
  meta["gap_fit"] = {{"Omega_rad_s", fit.Omega},
                     {"Omega_Hz", fit.Omega / k::two_pi},
                     {"damping_per_s", fit.damping},
                     {"S_infinity", fit.S_infinity},
                     {"S_infinity_norm", fit.S_infinity / (0.5 * bi.modes.realized_N)},
                     {"crossover_time_s", fit.crossover_time},
                     {"residual", fit.residual},
                     {"converged", fit.converged}};
  meta["chi2_to_free"] = chi2;
  write_json(cfg, "fit.json", meta);
  if (wants(cfg, "csv")) write_text_file(out_path(cfg, "trajectory.csv"), trajectory_to_csv(rec));
  std::printf("fit: Omega/2pi = %.4g Hz, S_inf = %.4g, chi2 = %.4g, converged = %d\n",
              fit.Omega / k::two_pi, fit.S_infinity, chi2, fit.converged ? 1 : 0);
  return kExitOk;
}

int cmd_ramsey(const RunConfig& cfg) {
  double amplitude;
  long atoms = cfg.ramsey.atoms;
  json instance_meta;
  if (cfg.ramsey.amplitude) {
    amplitude = *cfg.ramsey.amplitude;
    if (atoms <= 0) atoms = cfg.sampling.target_N;
  } else {
    const BuiltInstance bi = instance_from_config(cfg);
    TrajectoryRecord rec = evolve_from_config(cfg, bi);
    if (cfg.dephasing.enabled)
      rec = apply_dephasing(rec, bi.a_a0, cfg.dephasing.Gamma0_inv_s, cfg.dephasing.gamma_inv_s);
    double s_read = rec.S.back();
    double best = 1e300;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      const double d = std::abs(rec.times[i] - cfg.analysis.readout_time_s);
      if (d < best) {
        best = d;
        s_read = rec.S[i];
      }
    }
    amplitude = std::clamp(s_read / (0.5 * bi.modes.realized_N), 0.0, 1.0);
    if (atoms <= 0) atoms = bi.modes.realized_N;
    instance_meta = instance_stats(cfg, bi);
  }

  const ShotRecord shots = simulate_shots(amplitude, atoms, cfg.ramsey.n_shots,
                                          cfg.ramsey.noise_sigma,
                                          derive_seed(cfg.sampling.seed, 0x5247u));
  const MleEstimate est = mle_amplitude(shots);
  const std::string hash = config_hash(cfg);
  json meta = artifact_header("ramsey", hash, cfg.sampling.seed);
  if (!instance_meta.is_null()) meta["instance"] = instance_meta;
  meta["true_amplitude"] = amplitude;
  meta["estimate"] = mle_to_json(est, shots);
  write_json(cfg, "ramsey.json", meta);
  if (wants(cfg, "csv")) write_text_file(out_path(cfg, "shots.csv"), shots_to_csv(shots));
  std::printf("ramsey: A = %.4f, MLE = %.4f [%.4f, %.4f]\n", amplitude, est.amplitude,
              est.ci_low, est.ci_high);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collective Heisenberg model simulator: dynamical phases in mode space"};
  app.require_subcommand(1);

  CliOverrides ov;
  app.add_option("--config", ov.config_path, "JSON config path");
  app.add_option("--seed", ov.seed, "master seed override")->each([&](const std::string&) {
    ov.seed_set = true;
  });
  app.add_option("--out", ov.out_dir, "output directory override");
  app.add_option("--threads", ov.threads, "worker threads (0 = hardware)");
  app.add_option("--format", ov.format, "primary output format (csv or json)");
  app.fallthrough();

  auto* modes = app.add_subcommand("modes", "sample the mode lattice and coupling matrix");
  auto* evolve_cmd = app.add_subcommand("evolve", "integrate the Bloch dynamics");
  auto* echo = app.add_subcommand("echo", "many-body echo sequence and recovery ratio");
  auto* sweep = app.add_subcommand("sweep", "phase-diagram sweep and critical line");
  auto* lax = app.add_subcommand("lax", "Lax spectrum, phase label and analytic curves");
  auto* fit = app.add_subcommand("fit", "gap fit and chi^2 against the free signal");
  auto* ramsey = app.add_subcommand("ramsey", "virtual Ramsey shots and MLE readout");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = load_config(ov);
    if (modes->parsed()) return cmd_modes(cfg);
    if (evolve_cmd->parsed()) return cmd_evolve(cfg);
    if (echo->parsed()) return cmd_echo(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (lax->parsed()) return cmd_lax(cfg);
    if (fit->parsed()) return cmd_fit(cfg);
    if (ramsey->parsed()) return cmd_ramsey(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kExitInvariantError;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}

#include "chm/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include "chm/constants.hpp"
#include "chm/errors.hpp"

namespace chm {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) throw ConfigError("config: " + path + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + path + "." + it.key() + "'");
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::array<double, 3> hz_triplet(const json& j) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError("config: frequency triplets need exactly 3 entries");
  return {constants::two_pi * v[0], constants::two_pi * v[1], constants::two_pi * v[2]};
}

json to_hz_triplet(const std::array<double, 3>& w) {
  return json::array({w[0] / constants::two_pi, w[1] / constants::two_pi,
                      w[2] / constants::two_pi});
}

}  // namespace

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ConfigError("config: schema_version mismatch (expected " +
                      std::to_string(kSchemaVersion) + ")");
  trap.validate();
  if (interaction.B_mT.has_value() == interaction.a_a0.has_value())
    throw ConfigError("config: interaction must specify exactly one of B_mT or a_a0");
  if (sampling.target_N < 2) throw ConfigError("config: sampling.target_N must be >= 2");
  if (!(sampling.T_over_TF > 0.0 && sampling.T_over_TF <= 1.0))
    throw ConfigError("config: sampling.T_over_TF must lie in (0, 1]");
  if (schedule.type != "free" && schedule.type != "echo")
    throw ConfigError("config: schedule.type must be 'free' or 'echo'");
  if (schedule.init_pulse != "pi2_y" && schedule.init_pulse != "none")
    throw ConfigError("config: schedule.init_pulse must be 'pi2_y' or 'none'");
  if (!(schedule.t_total_s > 0.0)) throw ConfigError("config: schedule.t_total_s must be > 0");
  if (schedule.coupling_sign_first != 1 && schedule.coupling_sign_first != -1)
    throw ConfigError("config: schedule.coupling_sign_first must be +1 or -1");
  if (!(analysis.rtol > 0.0 && analysis.atol > 0.0))
    throw ConfigError("config: analysis tolerances must be > 0");
  if (!(analysis.window_fraction > 0.0 && analysis.window_fraction < 1.0))
    throw ConfigError("config: analysis.window_fraction must lie in (0, 1)");
  if (analysis.sample_count < 2) throw ConfigError("config: analysis.sample_count must be >= 2");
  if (!(dephasing.Gamma0_inv_s > 0.0 && dephasing.gamma_inv_s > 0.0))
    throw ConfigError("config: dephasing inverse rates must be > 0");
  if (ramsey.n_shots < 2) throw ConfigError("config: ramsey.n_shots must be >= 2");
  for (const auto& f : output.formats)
    if (f != "csv" && f != "json" && f != "bin")
      throw ConfigError("config: output.formats entries must be csv, json or bin");
}

double RunConfig::scattering_length_a0() const {
  if (interaction.a_a0) return *interaction.a_a0;
  return scattering_length(*interaction.B_mT, trap);
}

int RunConfig::effective_threads() const {
  if (const char* env = std::getenv("CHM_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  if (threads > 0) return threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

json RunConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["trap"] = {
      {"omega_Hz", to_hz_triplet(trap.omega)},
      {"delta_omega_Hz", to_hz_triplet(trap.delta_omega)},
      {"atom_mass_u", trap.atom_mass / constants::atomic_mass_unit},
      {"feshbach",
       {{"a_bg_a0", trap.feshbach.a_bg_a0},
        {"B0_mT", trap.feshbach.B0_mT},
        {"width_mT", trap.feshbach.width_mT}}},
      {"B_zc_mT", trap.B_zc_mT},
  };
  j["sampling"] = {{"target_N", sampling.target_N},
                   {"T_over_TF", sampling.T_over_TF},
                   {"seed", sampling.seed},
                   {"fixed_N", sampling.fixed_N},
                   {"center_fields", sampling.center_fields}};
  j["interaction"] = json::object();
  if (interaction.B_mT) j["interaction"]["B_mT"] = *interaction.B_mT;
  if (interaction.a_a0) j["interaction"]["a_a0"] = *interaction.a_a0;
  j["interaction"]["rescale"] = interaction.rescale;
  j["schedule"] = {{"type", schedule.type},
                   {"t_total_s", schedule.t_total_s},
                   {"coupling_sign_first", schedule.coupling_sign_first},
                   {"echo_residual_fraction", schedule.echo_residual_fraction},
                   {"init_pulse", schedule.init_pulse}};
  j["dephasing"] = {{"enabled", dephasing.enabled},
                    {"Gamma0_inv_s", dephasing.Gamma0_inv_s},
                    {"gamma_inv_s", dephasing.gamma_inv_s}};
  j["analysis"] = {{"readout_time_s", analysis.readout_time_s},
                   {"window_fraction", analysis.window_fraction},
                   {"alpha", analysis.alpha},
                   {"beta", analysis.beta},
                   {"rtol", analysis.rtol},
                   {"atol", analysis.atol},
                   {"sample_count", analysis.sample_count},
                   {"pair_tolerance", analysis.pair_tolerance}};
  j["sweep"] = {{"h_tilde_Hz", sweep.h_tilde_Hz},
                {"NJ_Hz", sweep.NJ_Hz},
                {"all_to_all", sweep.all_to_all},
                {"with_steady", sweep.with_steady},
                {"steady_horizon_s", sweep.steady_horizon_s},
                {"threshold", sweep.threshold},
                {"sample_count", sweep.sample_count}};
  j["ramsey"] = {{"n_shots", ramsey.n_shots},
                 {"noise_sigma", ramsey.noise_sigma},
                 {"atoms", ramsey.atoms}};
  if (ramsey.amplitude) j["ramsey"]["amplitude"] = *ramsey.amplitude;
  j["output"] = {{"directory", output.directory}, {"formats", output.formats}};
  j["threads"] = threads;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  check_keys(j, {"schema_version", "trap", "sampling", "interaction", "schedule", "dephasing",
                 "analysis", "sweep", "ramsey", "output", "threads"},
             "(root)");
  RunConfig cfg;
  if (!j.contains("schema_version")) throw ConfigError("config: schema_version is required");
  cfg.schema_version = j.at("schema_version").get<int>();

  if (j.contains("trap")) {
    const json& t = j.at("trap");
    check_keys(t, {"omega_Hz", "delta_omega_Hz", "atom_mass_u", "feshbach", "B_zc_mT"}, "trap");
    if (t.contains("omega_Hz")) cfg.trap.omega = hz_triplet(t.at("omega_Hz"));
    if (t.contains("delta_omega_Hz")) cfg.trap.delta_omega = hz_triplet(t.at("delta_omega_Hz"));
    if (t.contains("atom_mass_u"))
      cfg.trap.atom_mass = t.at("atom_mass_u").get<double>() * constants::atomic_mass_unit;
    if (t.contains("feshbach")) {
      const json& f = t.at("feshbach");
      check_keys(f, {"a_bg_a0", "B0_mT", "width_mT"}, "trap.feshbach");
      get_if(f, "a_bg_a0", cfg.trap.feshbach.a_bg_a0);
      get_if(f, "B0_mT", cfg.trap.feshbach.B0_mT);
      get_if(f, "width_mT", cfg.trap.feshbach.width_mT);
    }
    get_if(t, "B_zc_mT", cfg.trap.B_zc_mT);
  }
  if (j.contains("sampling")) {
    const json& s = j.at("sampling");
    check_keys(s, {"target_N", "T_over_TF", "seed", "fixed_N", "center_fields"}, "sampling");
    get_if(s, "target_N", cfg.sampling.target_N);
    get_if(s, "T_over_TF", cfg.sampling.T_over_TF);
    get_if(s, "seed", cfg.sampling.seed);
    get_if(s, "fixed_N", cfg.sampling.fixed_N);
    get_if(s, "center_fields", cfg.sampling.center_fields);
  }
  if (j.contains("interaction")) {
    const json& i = j.at("interaction");
    check_keys(i, {"B_mT", "a_a0", "rescale"}, "interaction");
    if (i.contains("B_mT")) cfg.interaction.B_mT = i.at("B_mT").get<double>();
    if (i.contains("a_a0")) cfg.interaction.a_a0 = i.at("a_a0").get<double>();
    get_if(i, "rescale", cfg.interaction.rescale);
  } else {
    cfg.interaction.a_a0 = 10.0;
  }
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    check_keys(s, {"type", "t_total_s", "coupling_sign_first", "echo_residual_fraction",
                   "init_pulse"},
               "schedule");
    get_if(s, "type", cfg.schedule.type);
    get_if(s, "t_total_s", cfg.schedule.t_total_s);
    get_if(s, "coupling_sign_first", cfg.schedule.coupling_sign_first);
    get_if(s, "echo_residual_fraction", cfg.schedule.echo_residual_fraction);
    get_if(s, "init_pulse", cfg.schedule.init_pulse);
  }
  if (j.contains("dephasing")) {
    const json& d = j.at("dephasing");
    check_keys(d, {"enabled", "Gamma0_inv_s", "gamma_inv_s"}, "dephasing");
    get_if(d, "enabled", cfg.dephasing.enabled);
    get_if(d, "Gamma0_inv_s", cfg.dephasing.Gamma0_inv_s);
    get_if(d, "gamma_inv_s", cfg.dephasing.gamma_inv_s);
  }
  if (j.contains("analysis")) {
    const json& a = j.at("analysis");
    check_keys(a, {"readout_time_s", "window_fraction", "alpha", "beta", "rtol", "atol",
                   "sample_count", "pair_tolerance"},
               "analysis");
    get_if(a, "readout_time_s", cfg.analysis.readout_time_s);
    get_if(a, "window_fraction", cfg.analysis.window_fraction);
    get_if(a, "alpha", cfg.analysis.alpha);
    get_if(a, "beta", cfg.analysis.beta);
    get_if(a, "rtol", cfg.analysis.rtol);
    get_if(a, "atol", cfg.analysis.atol);
    get_if(a, "sample_count", cfg.analysis.sample_count);
    get_if(a, "pair_tolerance", cfg.analysis.pair_tolerance);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"h_tilde_Hz", "NJ_Hz", "all_to_all", "with_steady", "steady_horizon_s",
                   "threshold", "sample_count"},
               "sweep");
    get_if(s, "h_tilde_Hz", cfg.sweep.h_tilde_Hz);
    get_if(s, "NJ_Hz", cfg.sweep.NJ_Hz);
    get_if(s, "all_to_all", cfg.sweep.all_to_all);
    get_if(s, "with_steady", cfg.sweep.with_steady);
    get_if(s, "steady_horizon_s", cfg.sweep.steady_horizon_s);
    get_if(s, "threshold", cfg.sweep.threshold);
    get_if(s, "sample_count", cfg.sweep.sample_count);
  }
  if (j.contains("ramsey")) {
    const json& r = j.at("ramsey");
    check_keys(r, {"n_shots", "noise_sigma", "atoms", "amplitude"}, "ramsey");
    get_if(r, "n_shots", cfg.ramsey.n_shots);
    get_if(r, "noise_sigma", cfg.ramsey.noise_sigma);
    get_if(r, "atoms", cfg.ramsey.atoms);
    if (r.contains("amplitude")) cfg.ramsey.amplitude = r.at("amplitude").get<double>();
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"directory", "formats"}, "output");
    get_if(o, "directory", cfg.output.directory);
    get_if(o, "formats", cfg.output.formats);
  }
  get_if(j, "threads", cfg.threads);
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: JSON parse failure in '" + path + "': " + e.what());
  }
  return from_json(j);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string canon = cfg.to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace chm

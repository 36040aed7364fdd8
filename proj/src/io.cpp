#include "chm/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chm/config.hpp"
#include "chm/constants.hpp"
#include "chm/errors.hpp"

namespace chm {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& body) {
  const auto dir = std::filesystem::path(path).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << body;
}

json artifact_header(const std::string& kind, const std::string& cfg_hash,
                     std::uint64_t master_seed) {
  return json{{"kind", kind},
              {"schema_version", kSchemaVersion},
              {"code_version", kCodeVersion},
              {"config_hash", cfg_hash},
              {"master_seed", master_seed}};
}

json modeset_to_json(const ModeSet& ms) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["target_N"] = ms.target_N;
  j["realized_N"] = ms.realized_N;
  j["T_over_TF"] = ms.temperature;
  j["chemical_potential_J"] = ms.chemical_potential;
  j["seed"] = ms.seed;
  j["centered_fields"] = ms.centered_fields;
  j["trap"] = {{"omega_rad_s", ms.trap.omega},
               {"delta_omega_rad_s", ms.trap.delta_omega},
               {"atom_mass_kg", ms.trap.atom_mass}};
  json modes = json::array();
  for (const auto& n : ms.modes) modes.push_back({n[0], n[1], n[2]});
  j["modes"] = std::move(modes);
  j["fields_rad_s"] = ms.fields;
  return j;
}

json coupling_meta_json(const CouplingMatrix& cm) {
  return json{{"schema_version", kSchemaVersion},
              {"N", cm.n},
              {"scale_U_rad_s", cm.scale_U},
              {"rescale", cm.rescale},
              {"layout", "dense row-major factors"}};
}

std::string coupling_to_csv(const CouplingMatrix& cm) {
  std::string out;
  out.reserve(static_cast<std::size_t>(cm.n) * cm.n * 8);
  for (long i = 0; i < cm.n; ++i) {
    for (long j = 0; j < cm.n; ++j) {
      if (j) out += ',';
      out += format_double(cm.factor(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_coupling_binary(const std::string& path, const CouplingMatrix& cm) {
  const auto dir = std::filesystem::path(path).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  const std::uint64_t n = static_cast<std::uint64_t>(cm.n);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(cm.factors.data()),
            static_cast<std::streamsize>(cm.factors.size() * sizeof(double)));
}

std::string trajectory_to_csv(const TrajectoryRecord& rec) {
  std::string out = "time_s,SX,SY,SZ,S,S_norm\n";
  const double inv_half_n = 2.0 / static_cast<double>(rec.n_spins);
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    out += format_double(rec.times[k]);
    out += ',';
    out += format_double(rec.SX[k]);
    out += ',';
    out += format_double(rec.SY[k]);
    out += ',';
    out += format_double(rec.SZ[k]);
    out += ',';
    out += format_double(rec.S[k]);
    out += ',';
    out += format_double(rec.S[k] * inv_half_n);
    out += '\n';
  }
  return out;
}

json trajectory_sidecar(const TrajectoryRecord& rec) {
  json sched;
  sched["segments"] = json::array();
  for (const auto& s : rec.schedule.segments)
    sched["segments"].push_back({{"duration_s", s.duration},
                                 {"coupling_sign", s.coupling_sign},
                                 {"field_scale", s.field_scale}});
  sched["pulses"] = json::array();
  for (const auto& p : rec.schedule.pulses)
    sched["pulses"].push_back(
        {{"time_s", p.time}, {"axis", {p.axis.x, p.axis.y, p.axis.z}}, {"angle_rad", p.angle}});
  return json{{"n_spins", rec.n_spins},
              {"rtol", rec.rtol},
              {"atol", rec.atol},
              {"dephasing_rate_per_s", rec.dephasing_rate},
              {"schedule", sched},
              {"diagnostics",
               {{"sz_drift", rec.diagnostics.sz_drift},
                {"norm_drift", rec.diagnostics.norm_drift},
                {"energy_drift", rec.diagnostics.energy_drift}}}};
}

std::string sweep_to_csv(const SweepGrid& grid) {
  std::string out = grid.with_steady
                        ? "h_tilde_Hz,NJ_Hz,S_norm,S_steady_norm,realized_N,seed\n"
                        : "h_tilde_Hz,NJ_Hz,S_norm,realized_N,seed\n";
  for (const auto& c : grid.cells) {
    const double half_n = 0.5 * static_cast<double>(std::max<long>(c.realized_N, 1));
    out += format_double(c.h_tilde / constants::two_pi);
    out += ',';
    out += format_double(c.NJ / constants::two_pi);
    out += ',';
    out += c.failed ? "nan" : format_double(c.S_readout / half_n);
    if (grid.with_steady) {
      out += ',';
      out += c.failed ? "nan" : format_double(c.S_steady / half_n);
    }
    out += ',';
    out += std::to_string(c.realized_N);
    out += ',';
    out += std::to_string(c.seed);
    out += '\n';
  }
  return out;
}

std::string critical_line_to_csv(const CriticalLine& line) {
  std::string out = "h_tilde_Hz,NJc_Hz\n";
  for (const auto& p : line.points) {
    out += format_double(p.h_tilde / constants::two_pi);
    out += ',';
    out += format_double(p.NJ_c / constants::two_pi);
    out += '\n';
  }
  return out;
}

json lax_to_json(const LaxSpectrum& spec) {
  json roots = json::array();
  for (const auto& r : spec.roots) roots.push_back({{"re", r.real()}, {"im", r.imag()}});
  return json{{"schema_version", kSchemaVersion},
              {"roots_rad_s", std::move(roots)},
              {"phase", spec.phase == LaxSpectrum::Phase::II ? "II" : "I"},
              {"gap_estimate_rad_s", spec.gap_estimate},
              {"gap_estimate_Hz", spec.gap_estimate / constants::two_pi},
              {"gap_from_im_factor", 2.0},
              {"pair_tolerance", spec.pair_tolerance},
              {"epsilon_spread_rad_s", spec.epsilon_spread}};
}

std::string shots_to_csv(const ShotRecord& rec) {
  std::string out = "shot_index,fraction_up\n";
  for (std::size_t k = 0; k < rec.fractions_up.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += format_double(rec.fractions_up[k]);
    out += '\n';
  }
  return out;
}

json mle_to_json(const MleEstimate& est, const ShotRecord& rec) {
  return json{{"schema_version", kSchemaVersion},
              {"amplitude", est.amplitude},
              {"ci_low", est.ci_low},
              {"ci_high", est.ci_high},
              {"log_likelihood", est.log_likelihood},
              {"degenerate", est.degenerate},
              {"n_shots", rec.fractions_up.size()},
              {"atoms_per_shot", rec.atoms_per_shot},
              {"noise_sigma", rec.noise_sigma},
              {"seed", rec.seed}};
}

}  // namespace chm

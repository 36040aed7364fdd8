#ifndef CHM_IO_HPP
#define CHM_IO_HPP

#include <json.hpp>
#include <string>

#include "chm/lax.hpp"
#include "chm/mode_lattice.hpp"
#include "chm/ramsey.hpp"
#include "chm/spin_dynamics.hpp"
#include "chm/sweep.hpp"

namespace chm {

// Deterministic shortest round-trip formatting; keeps CSV bodies bit-stable.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& body);

// Common metadata stamped into every JSON artifact.
nlohmann::json artifact_header(const std::string& kind, const std::string& cfg_hash,
                               std::uint64_t master_seed);

nlohmann::json modeset_to_json(const ModeSet& ms);
nlohmann::json coupling_meta_json(const CouplingMatrix& cm);
std::string coupling_to_csv(const CouplingMatrix& cm);
void write_coupling_binary(const std::string& path, const CouplingMatrix& cm);

// Columns: time_s, SX, SY, SZ, S, S_norm (= 2S/N).
std::string trajectory_to_csv(const TrajectoryRecord& rec);
nlohmann::json trajectory_sidecar(const TrajectoryRecord& rec);

// Long format: h_tilde_Hz, NJ_Hz, S_norm, realized_N, seed (+ S_steady_norm
// when the sweep recorded steady-state averages).
std::string sweep_to_csv(const SweepGrid& grid);
std::string critical_line_to_csv(const CriticalLine& line);

nlohmann::json lax_to_json(const LaxSpectrum& spec);

std::string shots_to_csv(const ShotRecord& rec);
nlohmann::json mle_to_json(const MleEstimate& est, const ShotRecord& rec);

}  // namespace chm

#endif

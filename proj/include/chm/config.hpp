#ifndef CHM_CONFIG_HPP
#define CHM_CONFIG_HPP

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "chm/trap.hpp"

namespace chm {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "0.1.0";

struct SamplingConfig {
  long target_N = 500;
  double T_over_TF = 0.4;
  std::uint64_t seed = 1;
  bool fixed_N = false;
  bool center_fields = false;
};

struct InteractionConfig {
  std::optional<double> B_mT;  // exactly one of B_mT / a_a0
  std::optional<double> a_a0;
  double rescale = 1.0;
};

struct ScheduleConfig {
  std::string type = "free";  // free | echo
  double t_total_s = 0.1;
  int coupling_sign_first = +1;
  double echo_residual_fraction = 0.0;
  std::string init_pulse = "pi2_y";  // pi2_y | none
};

struct DephasingConfig {
  bool enabled = false;
  double Gamma0_inv_s = 0.57;
  double gamma_inv_s = 600.0;
};

struct AnalysisConfig {
  double readout_time_s = 0.1;
  double window_fraction = 1.0 / 3.0;
  double alpha = 1.0;
  double beta = 1.0;
  double rtol = 1e-8;
  double atol = 1e-8;
  int sample_count = 400;
  double pair_tolerance = 1e-4;
};

struct SweepBlockConfig {
  std::vector<double> h_tilde_Hz{10.0, 18.1, 26.0};
  std::vector<double> NJ_Hz{-40, -30, -20, -12, -6, -2, 2, 6, 12, 20, 30, 40};
  bool all_to_all = false;
  bool with_steady = false;
  double steady_horizon_s = 2.0;
  double threshold = 0.5;
  int sample_count = 96;
};

struct RamseyConfig {
  long n_shots = 40;
  double noise_sigma = 0.05;
  long atoms = 0;  // 0: use the realized atom number
  std::optional<double> amplitude;  // explicit A; otherwise taken from the readout
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
};

// Full run configuration. Frequencies in config files are ordinary Hz,
// converted to rad/s on parse; unknown keys are hard errors.
struct RunConfig {
  int schema_version = kSchemaVersion;
  TrapConfig trap = default_trap();
  SamplingConfig sampling;
  InteractionConfig interaction;
  ScheduleConfig schedule;
  DephasingConfig dephasing;
  AnalysisConfig analysis;
  SweepBlockConfig sweep;
  RamseyConfig ramsey;
  OutputConfig output;
  int threads = 0;  // 0: available parallelism (CHM_THREADS overrides)

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);

  // Scattering length (a0) implied by the interaction block.
  double scattering_length_a0() const;
  int effective_threads() const;
};

// FNV-1a hash (hex) of the canonical serialized config.
std::string config_hash(const RunConfig& cfg);

}  // namespace chm

#endif

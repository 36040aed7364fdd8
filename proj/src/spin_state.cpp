#include "chm/spin_state.hpp"

#include <cmath>

#include "chm/errors.hpp"

namespace chm {

double SpinState::max_norm_error() const {
  double worst = 0.0;
  for (const auto& s : spins) worst = std::max(worst, std::abs(norm(s) - 0.5));
  return worst;
}

SpinState init_polarized(long n, int direction) {
  if (n < 1) throw ConfigError("init_polarized requires N >= 1");
  SpinState st;
  st.spins.assign(n, Vec3{0.0, 0.0, direction >= 0 ? 0.5 : -0.5});
  st.time = 0.0;
  return st;
}

SpinState apply_pulse(const SpinState& state, const Vec3& axis, double angle) {
  SpinState out = state;
  apply_pulse_in_place(out, axis, angle);
  return out;
}

void apply_pulse_in_place(SpinState& state, const Vec3& axis, double angle) {
  const double len = norm(axis);
  if (std::abs(len - 1.0) > 1e-9) throw ConfigError("pulse axis must be a unit vector");
  for (auto& s : state.spins) s = rotate(s, axis, angle);
}

}  // namespace chm

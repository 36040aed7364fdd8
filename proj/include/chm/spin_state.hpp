#ifndef CHM_SPIN_STATE_HPP
#define CHM_SPIN_STATE_HPP

#include <vector>

#include "chm/vec3.hpp"

namespace chm {

// Mean-field state: N classical Bloch vectors of length 1/2.
struct SpinState {
  std::vector<Vec3> spins;
  double time = 0.0;  // s

  long size() const { return static_cast<long>(spins.size()); }

  Vec3 collective() const {
    Vec3 s;
    for (const auto& v : spins) s += v;
    return s;
  }

  // Largest deviation of any |s_j| from 1/2.
  double max_norm_error() const;
};

// All spins polarized along +Z or -Z (direction = +1 or -1), time = 0.
SpinState init_polarized(long n, int direction = +1);

// Instantaneous rigid rotation of every spin about `axis` (unit vector).
SpinState apply_pulse(const SpinState& state, const Vec3& axis, double angle);
void apply_pulse_in_place(SpinState& state, const Vec3& axis, double angle);

}  // namespace chm

#endif

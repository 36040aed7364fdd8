#ifndef CHM_SCHEDULE_HPP
#define CHM_SCHEDULE_HPP

#include <vector>

#include "chm/vec3.hpp"

namespace chm {

// One stretch of Hamiltonian evolution with a fixed coupling sign.
// field_scale multiplies the axial fields within the segment; it models an
// imperfect echo reversal (residual gradient) and is 1 for ideal sequences.
struct Segment {
  double duration = 0.0;     // s
  int coupling_sign = +1;    // multiplies U
  double field_scale = 1.0;
};

struct Pulse {
  double time = 0.0;  // s, must sit on a segment boundary
  Vec3 axis{0.0, 0.0, 1.0};
  double angle = 0.0;  // rad
};

struct PulseSchedule {
  std::vector<Segment> segments;
  std::vector<Pulse> pulses;

  double total_time() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }

  // Checks durations > 0 and that every pulse time lies on a segment boundary.
  void validate() const;
};

// Single free-evolution segment of length t_total, no pulses.
PulseSchedule plain_schedule(double t_total, int coupling_sign = +1);

// Many-body echo: two segments of t_total/2 with opposite coupling sign and
// one pi pulse about X at the midpoint. The pulse maps s^Z -> -s^Z (reversing
// the axial term) while the exchange term is rotation invariant, so together
// with the coupling sign flip the full Hamiltonian is negated.
// residual_field_fraction > 0 leaves that fraction of the axial field
// unreversed in the second half.
PulseSchedule echo_schedule(double t_total, int coupling_sign_first = +1,
                            double residual_field_fraction = 0.0);

}  // namespace chm

#endif

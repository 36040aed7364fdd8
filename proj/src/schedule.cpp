#include "chm/schedule.hpp"

#include <cmath>
#include <string>

#include "chm/errors.hpp"

namespace chm {

void PulseSchedule::validate() const {
  if (segments.empty()) throw ConfigError("schedule has no segments");
  std::vector<double> boundaries{0.0};
  double t = 0.0;
  for (const auto& s : segments) {
    if (!(s.duration > 0.0)) throw ConfigError("segment durations must be > 0");
    t += s.duration;
    boundaries.push_back(t);
  }
  for (const auto& p : pulses) {
    bool on_boundary = false;
    for (double b : boundaries) {
      if (std::abs(p.time - b) <= 1e-12 * std::max(1.0, t)) {
        on_boundary = true;
        break;
      }
    }
    if (!on_boundary)
      throw ConfigError("pulse at t = " + std::to_string(p.time) +
                        " does not lie on a segment boundary");
  }
}

PulseSchedule plain_schedule(double t_total, int coupling_sign) {
  if (!(t_total > 0.0)) throw ConfigError("t_total must be > 0");
  PulseSchedule sched;
  sched.segments.push_back({t_total, coupling_sign, 1.0});
  return sched;
}

PulseSchedule echo_schedule(double t_total, int coupling_sign_first,
                            double residual_field_fraction) {
  if (!(t_total > 0.0)) throw ConfigError("t_total must be > 0");
  PulseSchedule sched;
  sched.segments.push_back({0.5 * t_total, coupling_sign_first, 1.0});
  sched.segments.push_back({0.5 * t_total, -coupling_sign_first, 1.0 - residual_field_fraction});
  sched.pulses.push_back({0.5 * t_total, Vec3{1.0, 0.0, 0.0}, M_PI});
  return sched;
}

}  // namespace chm

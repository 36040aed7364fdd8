#include "chm/spin_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chm/dopri5.hpp"
#include "chm/errors.hpp"

namespace chm {

namespace {

// RHS of the 3N Bloch equations over the flat state y = (s_0x, s_0y, s_0z, ...).
class BlochRhs {
 public:
  BlochRhs(const std::vector<double>& fields, const Coupling& coupling, double coupling_sign,
           double field_scale, int threads)
      : fields_(fields),
        coupling_(coupling),
        sign_(coupling_sign),
        field_scale_(field_scale),
        threads_(std::max(1, threads)),
        n_(static_cast<long>(fields.size())) {}

  void operator()(double /*t*/, const double* y, double* dy) const {
    switch (coupling_.kind) {
      case Coupling::Kind::None:
        free_precession(y, dy);
        break;
      case Coupling::Kind::Uniform:
        uniform_field(y, dy);
        break;
      case Coupling::Kind::Dense:
        dense_field(y, dy);
        break;
    }
  }

  long size() const { return n_; }

 private:
  static void precess(const double* s, double bx, double by, double bz, double* ds) {
    // ds/dt = B x s
    ds[0] = by * s[2] - bz * s[1];
    ds[1] = bz * s[0] - bx * s[2];
    ds[2] = bx * s[1] - by * s[0];
  }

  void free_precession(const double* y, double* dy) const {
    for (long j = 0; j < n_; ++j) {
      precess(y + 3 * j, 0.0, 0.0, field_scale_ * fields_[j], dy + 3 * j);
    }
  }

  void uniform_field(const double* y, double* dy) const {
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (long i = 0; i < n_; ++i) {
      sx += y[3 * i];
      sy += y[3 * i + 1];
      sz += y[3 * i + 2];
    }
    const double g = -2.0 * sign_ * coupling_.uniform_J;
    for (long j = 0; j < n_; ++j) {
      // all-to-all with the self-term excluded: sum_i s_i - s_j
      const double bx = g * (sx - y[3 * j]);
      const double by = g * (sy - y[3 * j + 1]);
      const double bz = g * (sz - y[3 * j + 2]) + field_scale_ * fields_[j];
      precess(y + 3 * j, bx, by, bz, dy + 3 * j);
    }
  }

  void dense_field(const double* y, double* dy) const {
    const CouplingMatrix& cm = *coupling_.dense;
    const double g = -2.0 * sign_ * cm.scale_U * cm.rescale;
    const double* f = cm.factors.data();
#pragma omp parallel for schedule(static) num_threads(threads_) if (threads_ > 1)
    for (long j = 0; j < n_; ++j) {
      const double* row = f + j * n_;
      double ax = 0.0, ay = 0.0, az = 0.0;
      for (long i = 0; i < n_; ++i) {
        const double w = row[i];
        ax += w * y[3 * i];
        ay += w * y[3 * i + 1];
        az += w * y[3 * i + 2];
      }
      precess(y + 3 * j, g * ax, g * ay, g * az + field_scale_ * fields_[j], dy + 3 * j);
    }
  }

  const std::vector<double>& fields_;
  Coupling coupling_;
  double sign_;
  double field_scale_;
  int threads_;
  long n_;
};

void flatten(const SpinState& st, std::vector<double>& y) {
  y.resize(3 * st.spins.size());
  for (std::size_t j = 0; j < st.spins.size(); ++j) {
    y[3 * j] = st.spins[j].x;
    y[3 * j + 1] = st.spins[j].y;
    y[3 * j + 2] = st.spins[j].z;
  }
}

SpinState unflatten(const std::vector<double>& y, double t) {
  SpinState st;
  st.spins.resize(y.size() / 3);
  for (std::size_t j = 0; j < st.spins.size(); ++j)
    st.spins[j] = Vec3{y[3 * j], y[3 * j + 1], y[3 * j + 2]};
  st.time = t;
  return st;
}

void collective_of(const std::vector<double>& y, double& sx, double& sy, double& sz) {
  sx = sy = sz = 0.0;
  for (std::size_t j = 0; j < y.size() / 3; ++j) {
    sx += y[3 * j];
    sy += y[3 * j + 1];
    sz += y[3 * j + 2];
  }
}

double max_norm_err(const std::vector<double>& y) {
  double worst = 0.0;
  for (std::size_t j = 0; j < y.size() / 3; ++j) {
    const double r =
        std::sqrt(y[3 * j] * y[3 * j] + y[3 * j + 1] * y[3 * j + 1] + y[3 * j + 2] * y[3 * j + 2]);
    worst = std::max(worst, std::abs(r - 0.5));
  }
  return worst;
}

// Scale against which energy drift is measured; robust when E itself nearly
// cancels. Sum of the maximum attainable magnitudes of both energy terms.
double energy_scale(const std::vector<double>& fields, const Coupling& coupling) {
  double s = 0.0;
  for (double h : fields) s += 0.5 * std::abs(h);
  const long n = static_cast<long>(fields.size());
  switch (coupling.kind) {
    case Coupling::Kind::None:
      break;
    case Coupling::Kind::Uniform:
      s += 0.25 * std::abs(coupling.uniform_J) * static_cast<double>(n) * (n - 1);
      break;
    case Coupling::Kind::Dense: {
      double fsum = 0.0;
      for (double v : coupling.dense->factors) fsum += std::abs(v);
      s += 0.25 * std::abs(coupling.dense->scale_U * coupling.dense->rescale) * fsum;
      break;
    }
  }
  return std::max(s, 1e-300);
}

}  // namespace

std::vector<Vec3> effective_field(const SpinState& state, const std::vector<double>& fields,
                                  const Coupling& coupling, double coupling_sign,
                                  double field_scale) {
  if (fields.size() != state.spins.size())
    throw ConfigError("effective_field: fields/spins dimension mismatch");
  const long n = state.size();
  std::vector<Vec3> B(n);
  switch (coupling.kind) {
    case Coupling::Kind::None:
      for (long j = 0; j < n; ++j) B[j] = Vec3{0.0, 0.0, field_scale * fields[j]};
      break;
    case Coupling::Kind::Uniform: {
      Vec3 total = state.collective();
      const double g = -2.0 * coupling_sign * coupling.uniform_J;
      for (long j = 0; j < n; ++j) {
        B[j] = g * (total - state.spins[j]);
        B[j].z += field_scale * fields[j];
      }
      break;
    }
    case Coupling::Kind::Dense: {
      const CouplingMatrix& cm = *coupling.dense;
      if (cm.n != n) throw ConfigError("effective_field: coupling matrix dimension mismatch");
      const double g = -2.0 * coupling_sign * cm.scale_U * cm.rescale;
      for (long j = 0; j < n; ++j) {
        double ax = 0.0, ay = 0.0, az = 0.0;
        for (long i = 0; i < n; ++i) {
          const double w = cm.factor(j, i);
          ax += w * state.spins[i].x;
          ay += w * state.spins[i].y;
          az += w * state.spins[i].z;
        }
        B[j] = Vec3{g * ax, g * ay, g * az + field_scale * fields[j]};
      }
      break;
    }
  }
  return B;
}

double mean_field_energy(const SpinState& state, const std::vector<double>& fields,
                         const Coupling& coupling, double coupling_sign, double field_scale) {
  const long n = state.size();
  double e_field = 0.0;
  for (long j = 0; j < n; ++j) e_field += field_scale * fields[j] * state.spins[j].z;
  double e_int = 0.0;
  switch (coupling.kind) {
    case Coupling::Kind::None:
      break;
    case Coupling::Kind::Uniform: {
      // sum_{i != j} J s_i . s_j = J (|S|^2 - sum_j |s_j|^2)
      Vec3 total = state.collective();
      double self = 0.0;
      for (const auto& s : state.spins) self += dot(s, s);
      e_int = coupling_sign * coupling.uniform_J * (dot(total, total) - self);
      break;
    }
    case Coupling::Kind::Dense: {
      const CouplingMatrix& cm = *coupling.dense;
      const double u = coupling_sign * cm.scale_U * cm.rescale;
      double acc = 0.0;
      for (long j = 0; j < n; ++j) {
        Vec3 m{};
        for (long i = 0; i < n; ++i) m += cm.factor(j, i) * state.spins[i];
        acc += dot(m, state.spins[j]);
      }
      e_int = u * acc;
      break;
    }
  }
  return e_field - e_int;
}

void TrajectoryRecord::validate() const {
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw InvariantError("TrajectoryRecord: times not increasing");
  // allow integrator-tolerance-level norm drift above the exact bound
  const double slack = 1e-7 + 100.0 * std::max(rtol, atol);
  const double cap = 0.5 * static_cast<double>(n_spins) * (1.0 + slack) + 1e-12;
  for (double s : S)
    if (s > cap) throw InvariantError("TrajectoryRecord: S exceeds N/2");
}

TrajectoryRecord evolve(const SpinState& initial, const std::vector<double>& fields,
                        const Coupling& coupling, const PulseSchedule& schedule,
                        const std::vector<double>& sample_times, const EvolveOptions& opts) {
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) throw ConfigError("evolve: tolerances must be > 0");
  if (fields.size() != initial.spins.size())
    throw ConfigError("evolve: fields/spins dimension mismatch");
  schedule.validate();

  const double t_total = schedule.total_time();
  std::vector<double> samples = sample_times;
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  if (!samples.empty() && (samples.front() < -1e-15 || samples.back() > t_total * (1.0 + 1e-12)))
    throw ConfigError("evolve: sample times outside the schedule span");

  TrajectoryRecord rec;
  rec.n_spins = initial.size();
  rec.schedule = schedule;
  rec.rtol = opts.rtol;
  rec.atol = opts.atol;

  const std::size_t n_samples = samples.size();
  auto want_snapshot = [&](std::size_t k) {
    if (n_samples == 0) return false;
    if (k == 0 || k + 1 == n_samples) return true;
    return opts.snapshot_stride > 0 && k % static_cast<std::size_t>(opts.snapshot_stride) == 0;
  };

  std::vector<double> y;
  flatten(initial, y);

  const double e_scale = energy_scale(fields, coupling);
  const double boundary_tol = 1e-12 * std::max(1.0, t_total);

  std::size_t next_sample = 0;
  auto record_from = [&](const std::vector<double>& yy, double t, std::size_t sample_idx) {
    double sx, sy, sz;
    collective_of(yy, sx, sy, sz);
    rec.times.push_back(t);
    rec.SX.push_back(sx);
    rec.SY.push_back(sy);
    rec.SZ.push_back(sz);
    rec.S.push_back(std::sqrt(sx * sx + sy * sy + sz * sz));
    if (want_snapshot(sample_idx)) rec.snapshots.emplace_back(t, unflatten(yy, t));
  };

  double t_cursor = 0.0;
  std::vector<double> y_interp;
  Diagnostics diag;

  for (std::size_t seg_idx = 0; seg_idx < schedule.segments.size(); ++seg_idx) {
    const Segment& seg = schedule.segments[seg_idx];
    const double t_seg_end = t_cursor + seg.duration;

    // Samples exactly at the segment start (post-pulse state).
    while (next_sample < n_samples && samples[next_sample] <= t_cursor + boundary_tol) {
      record_from(y, samples[next_sample], next_sample);
      ++next_sample;
    }

    BlochRhs rhs(fields, coupling, seg.coupling_sign, seg.field_scale, opts.threads);
    auto rhs_fn = [&rhs](double t, const double* yy, double* dy) { rhs(t, yy, dy); };
    const double safety = std::clamp(opts.tol_safety, 1e-3, 1.0);
    Dopri5<decltype(rhs_fn)> stepper(rhs_fn, y.size(), safety * opts.rtol, safety * opts.atol);
    stepper.set_state(t_cursor, y);

    const double e0 = mean_field_energy(unflatten(y, t_cursor), fields, coupling,
                                        seg.coupling_sign, seg.field_scale);
    double sz0, sx0, sy0;
    collective_of(y, sx0, sy0, sz0);

    double t = t_cursor;
    while (t < t_seg_end - boundary_tol) {
      const double t_prev = t;
      t = stepper.step(t_seg_end);
      // samples interior to (t_prev, t]; ones at the segment end wait for pulses
      while (next_sample < n_samples && samples[next_sample] <= t + boundary_tol &&
             samples[next_sample] < t_seg_end - boundary_tol) {
        if (samples[next_sample] > t_prev) {
          stepper.dense_eval(samples[next_sample], y_interp);
          record_from(y_interp, samples[next_sample], next_sample);
        }
        ++next_sample;
      }
      double sxc, syc, szc;
      collective_of(stepper.state(), sxc, syc, szc);
      diag.sz_drift = std::max(diag.sz_drift, std::abs(szc - sz0));
      diag.norm_drift = std::max(diag.norm_drift, max_norm_err(stepper.state()));
    }
    y = stepper.state();
    const double e1 = mean_field_energy(unflatten(y, t_seg_end), fields, coupling,
                                        seg.coupling_sign, seg.field_scale);
    diag.energy_drift =
        std::max(diag.energy_drift, std::abs(e1 - e0) / std::max(std::abs(e0), e_scale));

    // Apply pulses scheduled at this boundary, then record boundary samples.
    SpinState st = unflatten(y, t_seg_end);
    for (const auto& p : schedule.pulses) {
      if (std::abs(p.time - t_seg_end) <= boundary_tol) apply_pulse_in_place(st, p.axis, p.angle);
    }
    flatten(st, y);
    if (seg_idx + 1 == schedule.segments.size()) {
      while (next_sample < n_samples && samples[next_sample] <= t_seg_end + boundary_tol) {
        record_from(y, samples[next_sample], next_sample);
        ++next_sample;
      }
    }
    t_cursor = t_seg_end;
  }

  rec.diagnostics = diag;
  rec.validate();
  return rec;
}

SpinState evolve_final_state(const SpinState& initial, const std::vector<double>& fields,
                             const Coupling& coupling, const PulseSchedule& schedule,
                             const EvolveOptions& opts) {
  std::vector<double> samples{schedule.total_time()};
  TrajectoryRecord rec = evolve(initial, fields, coupling, schedule, samples, opts);
  return rec.snapshots.back().second;
}

double dephasing_rate(double a_a0, double Gamma0_inv_s, double gamma_inv_s) {
  if (!(Gamma0_inv_s > 0.0) || !(gamma_inv_s > 0.0))
    throw ConfigError("dephasing_rate: inverse rates must be > 0");
  return 1.0 / Gamma0_inv_s + (a_a0 * a_a0) / gamma_inv_s;
}

TrajectoryRecord apply_dephasing(const TrajectoryRecord& traj, double a_a0, double Gamma0_inv_s,
                                 double gamma_inv_s) {
  const double rate = dephasing_rate(a_a0, Gamma0_inv_s, gamma_inv_s);
  TrajectoryRecord out = traj;
  out.dephasing_rate = rate;
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    const double env = std::exp(-rate * out.times[k]);
    out.SX[k] *= env;
    out.SY[k] *= env;
    out.S[k] = std::sqrt(out.SX[k] * out.SX[k] + out.SY[k] * out.SY[k] + out.SZ[k] * out.SZ[k]);
  }
  return out;
}

Diagnostics conserved_diagnostics(const TrajectoryRecord& traj, const std::vector<double>& fields,
                                  const Coupling& coupling) {
  if (traj.snapshots.size() < 2)
    throw ConfigError("conserved_diagnostics: needs snapshots at first and last samples");

  Diagnostics d;
  for (const auto& [t, st] : traj.snapshots)
    d.norm_drift = std::max(d.norm_drift, st.max_norm_error());

  // Group snapshots by segment; SZ and energy are conserved only within one.
  // A snapshot on a boundary holds the post-pulse state, so it belongs to the
  // following segment whenever a pulse sits there.
  const double e_scale = energy_scale(fields, coupling);
  const double tol = 1e-12 * std::max(1.0, traj.schedule.total_time());
  auto pulse_at = [&](double t) {
    for (const auto& p : traj.schedule.pulses)
      if (std::abs(p.time - t) <= tol) return true;
    return false;
  };
  double t_lo = 0.0;
  for (const auto& seg : traj.schedule.segments) {
    const double t_hi = t_lo + seg.duration;
    bool have_ref = false;
    double sz_ref = 0.0, e_ref = 0.0;
    for (const auto& [t, st] : traj.snapshots) {
      if (t < t_lo - tol || t > t_hi + tol) continue;
      if (std::abs(t - t_hi) <= tol && pulse_at(t_hi)) continue;
      const double sz = st.collective().z;
      const double e =
          mean_field_energy(st, fields, coupling, seg.coupling_sign, seg.field_scale);
      if (!have_ref) {
        have_ref = true;
        sz_ref = sz;
        e_ref = e;
      } else {
        d.sz_drift = std::max(d.sz_drift, std::abs(sz - sz_ref));
        d.energy_drift = std::max(d.energy_drift,
                                  std::abs(e - e_ref) / std::max(std::abs(e_ref), e_scale));
      }
    }
    t_lo = t_hi;
  }
  return d;
}

}  // namespace chm

#include <doctest.h>

#include <cmath>

#include "chm/constants.hpp"
#include "chm/errors.hpp"
#include "chm/fit.hpp"
#include "chm/mode_lattice.hpp"
#include "chm/rng.hpp"
#include "chm/spin_dynamics.hpp"
#include "chm/sweep.hpp"

using namespace chm;
namespace k = chm::constants;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return v;
}

CouplingMatrix uniform_matrix(long n, double J) {
  CouplingMatrix cm;
  cm.n = n;
  cm.scale_U = J;
  cm.rescale = 1.0;
  cm.factors.assign(n * n, 1.0);
  for (long i = 0; i < n; ++i) cm.factors[i * n + i] = 0.0;
  return cm;
}

}  // namespace

TEST_CASE("init_polarized and pulses") {
  SpinState st = init_polarized(3);
  CHECK(st.collective().z == doctest::Approx(1.5));
  CHECK(st.collective().x == 0.0);
  CHECK(st.max_norm_error() == doctest::Approx(0.0));
  CHECK(norm(st.collective()) == doctest::Approx(1.5));

  // pi/2 about Y maps +Z to +X: maximal transverse magnetization
  SpinState rot = apply_pulse(st, Vec3{0, 1, 0}, M_PI / 2.0);
  CHECK(rot.spins[0].x == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rot.spins[0].z == doctest::Approx(0.0));
  CHECK(norm(rot.collective()) == doctest::Approx(1.5));
  CHECK(rot.collective().z == doctest::Approx(0.0));

  // angle 0 is the identity; two pi/2 pulses compose to one pi pulse
  SpinState same = apply_pulse(st, Vec3{0, 1, 0}, 0.0);
  CHECK(same.spins[1].z == st.spins[1].z);
  SpinState twice = apply_pulse(apply_pulse(st, Vec3{0, 1, 0}, M_PI / 2), Vec3{0, 1, 0}, M_PI / 2);
  SpinState once = apply_pulse(st, Vec3{0, 1, 0}, M_PI);
  CHECK(twice.spins[0].x == doctest::Approx(once.spins[0].x).epsilon(1e-14));
  CHECK(twice.spins[0].z == doctest::Approx(once.spins[0].z).epsilon(1e-14));

  CHECK_THROWS_AS(apply_pulse(st, Vec3{0, 2, 0}, 1.0), ConfigError);
  CHECK_THROWS_AS(init_polarized(0), ConfigError);
}

TEST_CASE("effective field limits") {
  SpinState st;
  st.spins = {Vec3{0.5, 0, 0}, Vec3{0.5, 0, 0}};
  const std::vector<double> h{3.0, -2.0};

  // J = 0: pure axial field
  auto b0 = effective_field(st, h, Coupling::none());
  CHECK(b0[0].z == doctest::Approx(3.0));
  CHECK(b0[1].z == doctest::Approx(-2.0));
  CHECK(b0[0].x == 0.0);

  // two-spin uniform coupling, zero field: B_1 = -2 J s_2 = (-J, 0, 0)
  const std::vector<double> h0{0.0, 0.0};
  auto b1 = effective_field(st, h0, Coupling::uniform(1.7));
  CHECK(b1[0].x == doctest::Approx(-1.7).epsilon(1e-14));
  CHECK(b1[0].y == 0.0);

  // dense path with equal off-diagonal couplings matches the fast path
  Rng rng(4);
  SpinState big;
  const long n = 40;
  for (long i = 0; i < n; ++i) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    big.spins.push_back(v * (0.5 / norm(v)));
  }
  std::vector<double> hb(n);
  for (double& x : hb) x = rng.uniform(-30.0, 30.0);
  const double J = 0.9;
  const CouplingMatrix cm = uniform_matrix(n, J);
  auto dense = effective_field(big, hb, Coupling::matrix(cm));
  auto fast = effective_field(big, hb, Coupling::uniform(J));
  for (long i = 0; i < n; ++i) {
    CHECK(std::abs(dense[i].x - fast[i].x) < 1e-13);
    CHECK(std::abs(dense[i].y - fast[i].y) < 1e-13);
    CHECK(std::abs(dense[i].z - fast[i].z) < 1e-13);
  }
}

TEST_CASE("single spin Larmor precession fixes the sign convention") {
  SpinState st;
  st.spins = {Vec3{0.5, 0.0, 0.0}};
  const double h = 2.0 * M_PI * 40.0;
  EvolveOptions opt;
  opt.rtol = opt.atol = 1e-12;
  const auto ts = linspace(0.0, 0.05, 101);
  const TrajectoryRecord rec =
      evolve(st, {h}, Coupling::none(), plain_schedule(0.05), ts, opt);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const double t = rec.times[i];
    CHECK(std::abs(rec.SX[i] - 0.5 * std::cos(h * t)) < 1e-9);
    CHECK(std::abs(rec.SY[i] - 0.5 * std::sin(h * t)) < 1e-9);
    CHECK(std::abs(rec.SZ[i]) < 1e-12);
  }
}

TEST_CASE("two opposite fields dephase as |cos|") {
  SpinState st = init_polarized(2);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);
  const double h0 = 2.0 * M_PI * 25.0;
  EvolveOptions opt;
  opt.rtol = opt.atol = 1e-12;
  const auto ts = linspace(0.0, 0.1, 157);
  const TrajectoryRecord rec =
      evolve(st, {h0, -h0}, Coupling::none(), plain_schedule(0.1), ts, opt);
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    CHECK(std::abs(rec.S[i] - std::abs(std::cos(h0 * rec.times[i]))) < 1e-9);
}

TEST_CASE("gapped all-to-all dynamics oscillates about a finite magnetization") {
  const long n = 200;
  const double h_tilde = k::two_pi * 18.1;
  const std::vector<double> fields = uniform_grid_fields(n, h_tilde);
  const double NJ = 10.0 * h_tilde;
  SpinState st = init_polarized(n);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);
  EvolveOptions opt;
  opt.rtol = opt.atol = 1e-9;
  const auto ts = linspace(0.0, 0.6, 600);
  const TrajectoryRecord rec = evolve(st, fields, Coupling::uniform(NJ / n),
                                      plain_schedule(0.6), ts, opt);
  const double s_mean = steady_state_average(rec, 1.0 / 3.0);
  CHECK(s_mean > 0.5 * (0.5 * n));  // well above the demagnetized floor
  // oscillation around the mean, not monotone decay
  double above = 0, below = 0;
  for (std::size_t i = 2 * rec.S.size() / 3; i < rec.S.size(); ++i)
    (rec.S[i] > s_mean ? above : below) += 1;
  CHECK(above > 10);
  CHECK(below > 10);
}

TEST_CASE("echo returns the transverse state after a full hamiltonian reversal") {
  // thermal instance, dense couplings, NJ/2pi ~ 18 Hz
  ModeSet ms = sample_occupied_modes(default_trap(), 120, 0.4, 77);
  rescale_fields(ms, k::two_pi * 18.1);
  CouplingMatrix cm = coupling_matrix(ms, 1.0, 1.0);
  cm.scale_U = (k::two_pi * 18.0) / (mean_factor(cm) * ms.realized_N);

  SpinState st = init_polarized(ms.realized_N);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);
  const double s0 = norm(st.collective());

  const PulseSchedule sched = echo_schedule(0.1);
  sched.validate();
  CHECK(sched.pulses.size() == 1);
  CHECK(sched.pulses[0].angle == doctest::Approx(M_PI));
  CHECK(sched.pulses[0].time == doctest::Approx(0.05));

  EvolveOptions opt;
  opt.rtol = opt.atol = 1e-10;
  const auto ts = linspace(0.0, 0.1, 51);
  const TrajectoryRecord rec = evolve(st, ms.fields, Coupling::matrix(cm), sched, ts, opt);
  CHECK(std::abs(rec.S.back() - s0) / s0 < 1e-6);

  // J = 0 limit is a plain Hahn echo and also refocuses
  const TrajectoryRecord hahn = evolve(st, ms.fields, Coupling::none(), sched, ts, opt);
  CHECK(std::abs(hahn.S.back() - s0) / s0 < 1e-8);
}

TEST_CASE("pi-pulse pair plus coupling flip reverses every spin") {
  ModeSet ms = sample_occupied_modes(default_trap(), 60, 0.4, 5);
  rescale_fields(ms, k::two_pi * 12.0);
  const double NJ = k::two_pi * 15.0;
  const Coupling coupling = Coupling::uniform(NJ / ms.realized_N);

  SpinState st = init_polarized(ms.realized_N);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);

  PulseSchedule sched;
  sched.segments.push_back({0.06, +1, 1.0});
  sched.segments.push_back({0.06, -1, 1.0});
  sched.pulses.push_back({0.06, Vec3{1, 0, 0}, M_PI});
  sched.pulses.push_back({0.12, Vec3{1, 0, 0}, M_PI});

  EvolveOptions opt;
  opt.rtol = opt.atol = 1e-10;
  const SpinState fin = evolve_final_state(st, ms.fields, coupling, sched, opt);
  double worst = 0.0;
  for (long j = 0; j < st.size(); ++j) worst = std::max(worst, norm(fin.spins[j] - st.spins[j]));
  CHECK(worst < 1e-6);
}

TEST_CASE("echo with a residual gradient does not fully refocus") {
  ModeSet ms = sample_occupied_modes(default_trap(), 80, 0.4, 9);
  rescale_fields(ms, k::two_pi * 25.0);
  SpinState st = init_polarized(ms.realized_N);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);
  EvolveOptions opt;
  opt.rtol = opt.atol = 1e-9;
  const auto ts = linspace(0.0, 0.1, 21);
  const double s0 = norm(st.collective());
  const TrajectoryRecord ideal =
      evolve(st, ms.fields, Coupling::none(), echo_schedule(0.1, +1, 0.0), ts, opt);
  const TrajectoryRecord leaky =
      evolve(st, ms.fields, Coupling::none(), echo_schedule(0.1, +1, 0.2), ts, opt);
  CHECK(std::abs(ideal.S.back() - s0) / s0 < 1e-7);
  CHECK(leaky.S.back() < 0.99 * s0);
}

TEST_CASE("dephasing envelope arithmetic") {
  CHECK(dephasing_rate(0.0, 0.57, 600.0) == doctest::Approx(1.0 / 0.57).epsilon(1e-14));
  CHECK(dephasing_rate(100.0, 0.57, 600.0) ==
        doctest::Approx(1.0 / 0.57 + 100.0 * 100.0 / 600.0).epsilon(1e-14));
  CHECK(dephasing_rate(-100.0, 0.57, 600.0) == dephasing_rate(100.0, 0.57, 600.0));

  TrajectoryRecord rec;
  rec.n_spins = 2;
  rec.times = {0.0, 0.1};
  rec.SX = {1.0, 1.0};
  rec.SY = {0.0, 0.0};
  rec.SZ = {0.3, 0.3};
  rec.S = {std::sqrt(1.09), std::sqrt(1.09)};
  const TrajectoryRecord no_echo = apply_dephasing(rec, 0.0, 0.57, 600.0);
  CHECK(no_echo.SX[1] == doctest::Approx(std::exp(-0.1 / 0.57)).epsilon(1e-12));
  const TrajectoryRecord echo = apply_dephasing(rec, 0.0, 0.25, 600.0);
  CHECK(echo.SX[1] == doctest::Approx(std::exp(-0.4)).epsilon(1e-12));
  CHECK(echo.SZ[1] == 0.3);  // longitudinal component untouched
  CHECK(echo.S[1] == doctest::Approx(std::hypot(std::exp(-0.4), 0.3)).epsilon(1e-12));
}

TEST_CASE("conservation diagnostics on free precession are at machine level") {
  ModeSet ms = sample_occupied_modes(default_trap(), 50, 0.4, 33);
  SpinState st = init_polarized(ms.realized_N);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);
  EvolveOptions opt;
  opt.rtol = opt.atol = 1e-13;
  opt.snapshot_stride = 4;
  const auto ts = linspace(0.0, 0.02, 33);
  const TrajectoryRecord rec =
      evolve(st, ms.fields, Coupling::none(), plain_schedule(0.02), ts, opt);
  const Diagnostics d = conserved_diagnostics(rec, ms.fields, Coupling::none());
  CHECK(d.sz_drift < 1e-12);
  CHECK(d.norm_drift < 1e-12);
  CHECK(d.energy_drift < 1e-11);
}

TEST_CASE("conservation invariants on a dense thermal instance") {
  ModeSet ms = sample_occupied_modes(default_trap(), 100, 0.4, 13);
  rescale_fields(ms, k::two_pi * 18.1);
  CouplingMatrix cm = coupling_matrix(ms, 1.0, 1.0);
  cm.scale_U = (k::two_pi * 12.0) / (mean_factor(cm) * ms.realized_N);

  SpinState st = init_polarized(ms.realized_N);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);
  const double rtol = 1e-10;
  EvolveOptions opt;
  opt.rtol = opt.atol = rtol;
  opt.snapshot_stride = 8;
  const auto ts = linspace(0.0, 0.1, 65);
  const TrajectoryRecord rec =
      evolve(st, ms.fields, Coupling::matrix(cm), plain_schedule(0.1), ts, opt);
  CHECK(rec.diagnostics.norm_drift < 10.0 * rtol);
  CHECK(rec.diagnostics.sz_drift < 10.0 * rtol * static_cast<double>(ms.realized_N));
  CHECK(rec.diagnostics.energy_drift < 100.0 * rtol);
  const Diagnostics d = conserved_diagnostics(rec, ms.fields, Coupling::matrix(cm));
  CHECK(d.sz_drift < 1e-8);
  CHECK(d.norm_drift < 1e-8);
}

TEST_CASE("uniform coupling fast path matches the dense path along a trajectory") {
  const long n = 60;
  const std::vector<double> fields = uniform_grid_fields(n, k::two_pi * 15.0);
  const double J = k::two_pi * 14.0 / n;
  SpinState st = init_polarized(n);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);
  EvolveOptions opt;
  opt.rtol = opt.atol = 1e-10;
  const auto ts = linspace(0.0, 0.2, 41);
  const CouplingMatrix cm = uniform_matrix(n, J);
  const TrajectoryRecord dense =
      evolve(st, fields, Coupling::matrix(cm), plain_schedule(0.2), ts, opt);
  const TrajectoryRecord fast =
      evolve(st, fields, Coupling::uniform(J), plain_schedule(0.2), ts, opt);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(std::abs(dense.SX[i] - fast.SX[i]) < 1e-9);
    CHECK(std::abs(dense.SY[i] - fast.SY[i]) < 1e-9);
    CHECK(std::abs(dense.SZ[i] - fast.SZ[i]) < 1e-9);
  }
}

TEST_CASE("halving the tolerance converges") {
  ModeSet ms = sample_occupied_modes(default_trap(), 40, 0.4, 3);
  rescale_fields(ms, k::two_pi * 20.0);
  SpinState st = init_polarized(ms.realized_N);
  apply_pulse_in_place(st, Vec3{0, 1, 0}, M_PI / 2.0);
  const Coupling c = Coupling::uniform(k::two_pi * 10.0 / ms.realized_N);
  auto run = [&](double tol) {
    EvolveOptions opt;
    opt.rtol = opt.atol = tol;
    return evolve(st, ms.fields, c, plain_schedule(0.1), {0.1}, opt).S.back();
  };
  const double coarse = run(1e-6);
  const double fine = run(5e-7);
  CHECK(std::abs(coarse - fine) < 1e-6 * (0.5 * ms.realized_N));
}

TEST_CASE("sample times outside the schedule are rejected") {
  SpinState st = init_polarized(2);
  CHECK_THROWS_AS(
      evolve(st, {1.0, 2.0}, Coupling::none(), plain_schedule(0.1), {0.2}, EvolveOptions{}),
      ConfigError);
}

#ifndef CHM_DOPRI5_HPP
#define CHM_DOPRI5_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "chm/errors.hpp"

namespace chm {

// Dormand-Prince 5(4) embedded pair with PI step-size control and the
// standard quartic continuous extension for dense output.
namespace dopri5_detail {
inline constexpr double a21 = 0.2, a31 = 3.0 / 40.0, a32 = 9.0 / 40.0, a41 = 44.0 / 45.0,
                        a42 = -56.0 / 15.0, a43 = 32.0 / 9.0, a51 = 19372.0 / 6561.0,
                        a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0,
                        a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0, a71 = 35.0 / 384.0,
                        a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
inline constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta = 0.04;
}  // namespace dopri5_detail

struct IntegratorStats {
  std::size_t n_steps = 0;
  std::size_t n_accepted = 0;
  std::size_t n_rejected = 0;
  std::size_t n_rhs = 0;
};

// RHS: callable as rhs(t, y_ptr, dydt_ptr) over flat state arrays.
template <typename Rhs>
class Dopri5 {
 public:
  Dopri5(Rhs rhs, std::size_t dim, double rtol, double atol)
      : rhs_(rhs), dim_(dim), rtol_(rtol), atol_(atol) {
    y_.resize(dim_);
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_}) k->resize(dim_);
    y_new_.resize(dim_);
    y_stage_.resize(dim_);
    rc_.assign(5, std::vector<double>(dim_));
  }

  void set_state(double t, const std::vector<double>& y) {
    t_ = t;
    y_ = y;
    h_ = 0.0;
    have_k1_ = false;
    facold_ = 1e-4;
  }

  double time() const { return t_; }
  const std::vector<double>& state() const { return y_; }
  const IntegratorStats& stats() const { return stats_; }

  // Advance one accepted step, not beyond t_end. Returns the new time.
  // After the call, dense_eval() interpolates on [previous t, new t].
  double step(double t_end) {
    using namespace dopri5_detail;
    if (!have_k1_) {
      rhs_(t_, y_.data(), k1_.data());
      ++stats_.n_rhs;
      have_k1_ = true;
    }
    if (h_ == 0.0) h_ = initial_step(t_end);

    bool rejected = false;
    for (;;) {
      if (0.1 * std::abs(h_) <= std::abs(t_) * std::numeric_limits<double>::epsilon())
        throw NumericalError("step-size underflow (stiffness) at t = " + std::to_string(t_));
      bool last = false;
      if (t_ + 1.01 * h_ - t_end > 0.0) {
        last = true;
        h_ = t_end - t_;
      }
      const double h = h_;

      for (std::size_t i = 0; i < dim_; ++i) y_stage_[i] = y_[i] + h * a21 * k1_[i];
      rhs_(t_ + c2 * h, y_stage_.data(), k2_.data());
      for (std::size_t i = 0; i < dim_; ++i)
        y_stage_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
      rhs_(t_ + c3 * h, y_stage_.data(), k3_.data());
      for (std::size_t i = 0; i < dim_; ++i)
        y_stage_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
      rhs_(t_ + c4 * h, y_stage_.data(), k4_.data());
      for (std::size_t i = 0; i < dim_; ++i)
        y_stage_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
      rhs_(t_ + c5 * h, y_stage_.data(), k5_.data());
      for (std::size_t i = 0; i < dim_; ++i)
        y_stage_[i] =
            y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
      rhs_(t_ + h, y_stage_.data(), k6_.data());
      for (std::size_t i = 0; i < dim_; ++i)
        y_new_[i] =
            y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
      rhs_(t_ + h, y_new_.data(), k7_.data());
      stats_.n_rhs += 6;
      ++stats_.n_steps;

      double err = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        const double ee = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                               e6 * k6_[i] + e7 * k7_[i]);
        const double sc = atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
        err += (ee / sc) * (ee / sc);
      }
      err = std::sqrt(err / static_cast<double>(dim_));

      const double fac11 = std::pow(err, 0.2 - beta * 0.75);
      double fac = fac11 / std::pow(facold_, beta);
      fac = std::max(1.0 / facr, std::min(1.0 / facl, fac / safe));
      double h_next = h / fac;

      if (err > 1.0) {
        h_ = h / std::min(1.0 / facl, fac11 / safe);
        rejected = true;
        ++stats_.n_rejected;
        continue;
      }

      // Accepted: build the dense-output coefficients for [t_, t_ + h].
      facold_ = std::max(err, 1e-4);
      for (std::size_t i = 0; i < dim_; ++i) {
        const double ydiff = y_new_[i] - y_[i];
        const double bspl = h * k1_[i] - ydiff;
        rc_[0][i] = y_[i];
        rc_[1][i] = ydiff;
        rc_[2][i] = bspl;
        rc_[3][i] = ydiff - h * k7_[i] - bspl;
        rc_[4][i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                         d7 * k7_[i]);
      }
      t_prev_ = t_;
      h_prev_ = h;
      t_ = last ? t_end : t_ + h;
      y_.swap(y_new_);
      k1_.swap(k7_);  // FSAL
      if (rejected) h_next = std::min(std::abs(h_next), std::abs(h));
      h_ = h_next;
      ++stats_.n_accepted;
      return t_;
    }
  }

  // Interpolate component values at t within the last accepted step.
  void dense_eval(double t, std::vector<double>& out) const {
    const double th = h_prev_ != 0.0 ? (t - t_prev_) / h_prev_ : 0.0;
    const double th1 = 1.0 - th;
    out.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      out[i] = rc_[0][i] +
               th * (rc_[1][i] + th1 * (rc_[2][i] + th * (rc_[3][i] + th1 * rc_[4][i])));
    }
  }

 private:
  double initial_step(double t_end) const {
    // Hairer's hinit: match 0.01 against the scaled first and second derivative.
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double sc = atol_ + rtol_ * std::abs(y_[i]);
      dnf += (k1_[i] / sc) * (k1_[i] / sc);
      dny += (y_[i] / sc) * (y_[i] / sc);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, std::abs(t_end - t_));

    std::vector<double> y1(dim_), k2(dim_);
    for (std::size_t i = 0; i < dim_; ++i) y1[i] = y_[i] + h * k1_[i];
    rhs_(t_ + h, y1.data(), k2.data());

    double der2 = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double sc = atol_ + rtol_ * std::abs(y_[i]);
      der2 += ((k2[i] - k1_[i]) / sc) * ((k2[i] - k1_[i]) / sc);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 =
        der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, std::abs(t_end - t_)});
  }

  Rhs rhs_;
  std::size_t dim_;
  double rtol_, atol_;
  double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0, h_prev_ = 0.0;
  double facold_ = 1e-4;
  bool have_k1_ = false;
  std::vector<double> y_, y_new_, y_stage_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_;
  std::vector<std::vector<double>> rc_;
  IntegratorStats stats_;
};

}  // namespace chm

#endif

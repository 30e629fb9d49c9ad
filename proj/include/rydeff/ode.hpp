#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydeff {

struct StiffnessError : std::runtime_error {
  double smallest_step;
  explicit StiffnessError(double h)
      : std::runtime_error("ODE step size underflow (smallest step " + std::to_string(h) +
                           "); the problem appears too stiff for the explicit integrator"),
        smallest_step(h) {}
};

struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0;  // 0 = choose automatically
  double max_step = std::numeric_limits<double>::infinity();
};

// Dormand-Prince 5(4) embedded Runge-Kutta with PI step control and the
// standard quartic dense-output interpolant.
class Dopri5 {
 public:
  using Rhs = std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

  Dopri5(Rhs rhs, Eigen::VectorXcd y0, double t0, OdeOptions opts = {})
      : rhs_(std::move(rhs)), y_(std::move(y0)), t_(t0), opts_(opts) {
    const auto n = y_.size();
    for (auto& k : k_) k.resize(n);
    y_stage_.resize(n);
    y_new_.resize(n);
    rhs_(t_, y_, k_[0]);
    have_k1_ = true;
    h_ = opts_.initial_step > 0 ? opts_.initial_step : guess_initial_step();
  }

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const Eigen::VectorXcd& y() const { return y_; }
  Eigen::VectorXcd& mutable_y() { return y_; }
  double suggested_step() const { return h_; }

  // Restart after the state was modified externally (e.g. a quantum jump).
  void reset_state(const Eigen::VectorXcd& y, double t) {
    y_ = y;
    t_ = t;
    rhs_(t_, y_, k_[0]);
    have_k1_ = true;
  }

  // Take one accepted step, not crossing t_limit. Returns false when already
  // at t_limit.
  bool step(double t_limit) {
    if (t_ >= t_limit) return false;
    const double span = std::max(std::abs(t_limit), 1.0);
    int rejects = 0;
    for (;;) {
      double h = std::min({h_, opts_.max_step, t_limit - t_});
      if (h < 1e-14 * span) throw StiffnessError(h);
      const double err = attempt(h);
      if (err <= 1.0) {
        t_prev_ = t_;
        h_last_ = h;
        t_ += h;
        rc1_stash_ = y_;
        y_.swap(y_new_);
        k_[0].swap(k_[6]);  // FSAL
        have_k1_ = true;
        dense_fresh_ = false;
        const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                           std::pow(std::max(err_prev_, 1e-10), 0.4 / 5.0);
        h_ = h * std::min(5.0, std::max(0.2, fac));
        err_prev_ = std::max(err, 1e-10);
        return true;
      }
      h_ = h * std::min(1.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      if (++rejects > 200) throw StiffnessError(h_);
    }
  }

  void advance_to(double t_target) {
    while (step(t_target)) {
    }
  }

  // Dense-output evaluation inside the last accepted step [t_prev, t].
  Eigen::VectorXcd dense_eval(double ti) const {
    if (h_last_ <= 0) throw std::logic_error("dense_eval: no step taken yet");
    if (!dense_fresh_) prepare_dense();
    const double theta = (ti - t_prev_) / h_last_;
    const double th1 = 1.0 - theta;
    return rc1_ + theta * (rc2_ + th1 * (rc3_ + theta * (rc4_ + th1 * rc5_)));
  }

 private:
  double guess_initial_step() const {
    const double d0 = y_.norm();
    const double d1 = k_[0].norm();
    double h = (d0 > 1e-12 && d1 > 1e-12) ? 0.01 * d0 / d1 : 1e-6;
    return std::min(h, opts_.max_step);
  }

  // returns scaled error; fills y_new_ and k_ stages (k_[6] = f(t+h, y_new))
  double attempt(double h) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    if (!have_k1_) {
      rhs_(t_, y_, k_[0]);
      have_k1_ = true;
    }
    y_stage_ = y_ + h * (a21 * k_[0]);
    rhs_(t_ + h / 5, y_stage_, k_[1]);
    y_stage_ = y_ + h * (a31 * k_[0] + a32 * k_[1]);
    rhs_(t_ + 3 * h / 10, y_stage_, k_[2]);
    y_stage_ = y_ + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    rhs_(t_ + 4 * h / 5, y_stage_, k_[3]);
    y_stage_ = y_ + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    rhs_(t_ + 8 * h / 9, y_stage_, k_[4]);
    y_stage_ = y_ + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
    rhs_(t_ + h, y_stage_, k_[5]);
    y_new_ = y_ + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
    rhs_(t_ + h, y_new_, k_[6]);

    double err2 = 0;
    const auto n = y_.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> e =
          h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] + e6 * k_[5][i] +
               e7 * k_[6][i]);
      const double sc = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
      err2 += std::norm(e / sc);
    }
    // stash stages used by the dense output of this attempt
    k1d_ = k_[0];
    return std::sqrt(err2 / n);
  }

  void prepare_dense() const {
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;
    const double h = h_last_;
    // note: after an accepted step k_[0] holds f(t_new, y_new) (FSAL swap) and
    // k1d_ holds f(t_prev, y_prev)
    const Eigen::VectorXcd ydiff = y_ - rc1_stash_;
    rc1_ = rc1_stash_;
    rc2_ = ydiff;
    rc3_ = h * k1d_ - ydiff;
    rc4_ = ydiff - h * k_[0] - rc3_;
    rc5_ = h * (d1 * k1d_ + d3 * k_[2] + d4 * k_[3] + d5 * k_[4] + d6 * k_[5] + d7 * k_[0]);
    dense_fresh_ = true;
  }

 private:
  Rhs rhs_;
  Eigen::VectorXcd y_;
  double t_ = 0;
  OdeOptions opts_;
  double h_ = 1e-6;
  double h_last_ = 0;
  double t_prev_ = 0;
  double err_prev_ = 1e-4;
  bool have_k1_ = false;
  std::array<Eigen::VectorXcd, 7> k_;
  Eigen::VectorXcd y_stage_, y_new_;
  Eigen::VectorXcd k1d_;
  Eigen::VectorXcd rc1_stash_;
  mutable bool dense_fresh_ = false;
  mutable Eigen::VectorXcd rc1_, rc2_, rc3_, rc4_, rc5_;
};

// Integrate and invoke `on_sample` at every sample time (dense output within
// accepted steps; the trajectory is never restarted at samples).
inline void integrate_sampled(const Dopri5::Rhs& rhs, Eigen::VectorXcd& y, double t0,
                              const std::vector<double>& sample_times,
                              const std::function<void(double, const Eigen::VectorXcd&)>& on_sample,
                              const OdeOptions& opts = {}) {
  std::size_t next = 0;
  while (next < sample_times.size() && sample_times[next] <= t0 + 1e-15 * std::max(1.0, std::abs(t0))) {
    on_sample(sample_times[next], y);
    ++next;
  }
  if (next >= sample_times.size()) return;
  const double t_end = sample_times.back();
  Dopri5 solver(rhs, y, t0, opts);
  while (solver.t() < t_end) {
    if (!solver.step(t_end)) break;
    while (next < sample_times.size() && sample_times[next] <= solver.t() + 1e-12) {
      on_sample(sample_times[next], solver.dense_eval(std::min(sample_times[next], solver.t())));
      ++next;
    }
  }
  y = solver.y();
}

}  // namespace rydeff

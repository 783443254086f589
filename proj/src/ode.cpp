#include "curvflow/ode.hpp"

#include <algorithm>
#include <cmath>

namespace curvflow {

namespace {

// Dormand-Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeStatus integrate_dopri5(const std::function<void(double, const Vec&, Vec&)>& rhs,
                           double& t, Vec& y, double t_end, const OdeOptions& opts,
                           const std::function<bool(double, Vec&)>& on_accept) {
  const std::size_t n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  double dt = std::min(opts.dt_init, std::max(1e-30, t_end - t));
  bool have_k1 = false;

  for (long step = 0; step < opts.max_steps; ++step) {
    if (t_end - t <= 1e-14 * std::max(1.0, std::abs(t_end))) return OdeStatus::Done;
    dt = std::min(dt, t_end - t);
    bool rejected_by_rhs = false;
    double err = 0.0;
    try {
      if (!have_k1) rhs(t, y, k1);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dt * a21 * k1[i];
      rhs(t + c2 * dt, ytmp, k2);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + dt * (a31 * k1[i] + a32 * k2[i]);
      rhs(t + c3 * dt, ytmp, k3);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + dt * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(t + c4 * dt, ytmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + dt * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhs(t + c5 * dt, ytmp, k5);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + dt * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                               a65 * k5[i]);
      rhs(t + dt, ytmp, k6);
      for (std::size_t i = 0; i < n; ++i)
        ynew[i] = y[i] + dt * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                               b6 * k6[i]);
      rhs(t + dt, ynew, k7);  // FSAL
      for (std::size_t i = 0; i < n; ++i) {
        const double ei = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                e6 * k6[i] + e7 * k7[i]);
        const double sc =
            opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err = std::max(err, std::abs(ei) / sc);
      }
    } catch (const RegimeExitError&) {
      rejected_by_rhs = true;
    }

    if (!rejected_by_rhs && err <= 1.0) {
      t += dt;
      y = ynew;
      k1 = k7;
      have_k1 = true;
      if (on_accept) {
        if (!on_accept(t, y)) return OdeStatus::Callback;
        have_k1 = false;  // the callback may have projected y
      }
      const double fac =
          std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
      dt = std::min(dt * fac, opts.dt_max);
    } else {
      const double fac =
          rejected_by_rhs
              ? 0.25
              : std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      dt *= fac;
      have_k1 = !rejected_by_rhs && have_k1;
      if (dt < opts.dt_min)
        return rejected_by_rhs ? OdeStatus::Callback : OdeStatus::StepUnderflow;
    }
  }
  return OdeStatus::MaxSteps;
}

}  // namespace curvflow

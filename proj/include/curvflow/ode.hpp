#pragma once

#include <functional>

#include "curvflow/common.hpp"

namespace curvflow {

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double dt_init = 1e-3;
  double dt_min = 1e-14;
  double dt_max = 1e30;
  long max_steps = 2'000'000;
};

enum class OdeStatus { Done, StepUnderflow, MaxSteps, Callback };

// Dormand-Prince 5(4). `rhs(t, y, dy)` may throw RegimeExitError; the step is
// then rejected and retried with a smaller dt, and integration stops with
// Callback status once dt underflows that way. `on_accept` (optional) is
// called after each accepted step, may project the state (manifold
// retraction), and may veto continuation by returning false (status
// Callback).
OdeStatus integrate_dopri5(
    const std::function<void(double, const Vec&, Vec&)>& rhs, double& t, Vec& y,
    double t_end, const OdeOptions& opts,
    const std::function<bool(double, Vec&)>& on_accept = nullptr);

}  // namespace curvflow

#pragma once

#include <functional>

#include "curvflow/common.hpp"

namespace curvflow {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  long evals = 0;
};

// Adaptive Gauss-Kronrod 15(7) on [a, b]. Optional breakpoints force an
// initial subdivision (useful for two-scale integrands).
QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol = 1e-12,
                        const std::vector<double>& breakpoints = {},
                        int max_intervals = 4000);

// ω_{n−1} ∫_0^∞ g(r) r^{n−1} dr for g with algebraic decay g ~ C r^{−decay}.
// The cut radius R is chosen from the analytic tail bound so the discarded
// tail is below tail_tol; decay ≤ n raises NumericError (divergent integral).
double radial_integral_nd(const std::function<double(double)>& g, int n, double decay,
                          double abs_tol = 1e-11, double tail_tol = 1e-13);

}  // namespace curvflow

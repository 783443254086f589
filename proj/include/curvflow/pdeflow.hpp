#pragma once

#include <string>

#include "curvflow/energy.hpp"

namespace curvflow {

struct FlowState {
  double t = 0.0;
  ScalarField field;
  CurvatureData cc;  // cached, consistent with field
  double int_r_over_k = 0.0;  // ∫_0^t (r/k) dτ   (for R̃)
  double int_deltaJ2 = 0.0;   // ∫_0^t |δJ|² dτ
  double dt_next = 1e-4;
};

struct FlowRow {
  double t, J, r, k, minR, minRtildeOverK, maxU, minU, deltaJ, intDeltaJ2;
};

struct FlowDiagnostics {
  std::vector<FlowRow> rows;
  std::string csv() const;
};

struct FlowConfig {
  int dim = 3;
  KSpec K = KSpec::constant(1.0);
  int grid_size = 256;
  double t_end = 1.0;
  double dt_init = 1e-4;
  double tol = 1e-12;          // per-step J-increase rejection threshold
  bool adapt_dt = true;
  double dt_max = 1e-2;
  int output_every = 25;       // diagnostics cadence (accepted steps)
  std::string init = "constant";  // constant | cosine | bubble | file
  double init_amplitude = 0.3;    // cosine preset
  double init_lambda = 10.0;      // bubble preset
  std::string init_file;          // CSV for init = file
};

// Initial data presets, projected to k = 1.
ScalarField initial_field(const FlowConfig& cfg);

FlowState make_state(ScalarField field, const KSpec& K, double dt_init);

// One IMEX step: stiff linear part −c_nΔ implicit with the frozen factor
// u_old^{−4/(n−2)}/K, nonlinear factors explicit, then multiplicative
// renormalization restoring k = 1. Rejects (halving dt) on positivity loss
// or J increase beyond tol; throws NumericError once dt underflows 1e−12.
FlowState step(const FlowState& state, const KSpec& K, double dt, double tol = 1e-12);

struct FlowResult {
  FlowState final_state;
  FlowDiagnostics diagnostics;
  bool stiffness_failure = false;
  std::string failure_reason;
};

FlowResult run_flow(const FlowConfig& cfg);

struct MonotonicityCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst violation magnitude
};

// J non-increasing, |k−1| small, min(R̃/K) non-decreasing, |δJ| decay trend.
std::vector<MonotonicityCheck> verify_monotonicity(const FlowDiagnostics& diag,
                                                   const KSpec& K);

}  // namespace curvflow

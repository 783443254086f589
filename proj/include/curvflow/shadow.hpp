#pragma once

#include <string>

#include "curvflow/bubbles.hpp"
#include "curvflow/constants.hpp"

namespace curvflow {

enum class ShadowMode { NoSolution, WithSolution };
enum class RoverKPolicy { LeadingEnergy, Frozen };

struct ShadowConfig {
  ModelSpace space;  // carries the mass handle H(a) for mode = NoSolution
  ShadowMode mode = ShadowMode::NoSolution;
  KSpec K = KSpec::constant(1.0);
  double solution_alpha = 1.0;                     // α, mode = WithSolution
  std::function<double(const Vec&)> omega;         // ω(a) > 0, WithSolution
  ConstantsTable constants;
  RoverKPolicy policy = RoverKPolicy::LeadingEnergy;
  double max_K = 1.0;  // for the frozen policy
};

struct ShadowState {
  double t = 0.0;
  std::vector<BubbleParam> bubbles;
};

struct ShadowRhs {
  std::vector<double> dln_alpha, dln_lambda;
  std::vector<Vec> da;
};

double r_over_k(const ShadowConfig& cfg, const std::vector<double>& K_at_a);

// Principal shadow flow (remainders ≡ 0, (1+o(1)) ≡ 1); α relaxes to the
// algebraic balance r α^{4/(n−2)} K = 4n(n−1) k. Throws RegimeExitError when
// some ε_ij ≥ 0.5.
ShadowRhs shadow_rhs(const ShadowState& state, const ShadowConfig& cfg);

struct ShadowSample {
  double t;
  std::vector<BubbleParam> bubbles;
};

enum class ShadowStop { ReachedTEnd, RegimeExit, LambdaFloor, Stiffness };

struct ShadowTrajectory {
  std::vector<ShadowSample> samples;
  ShadowStop stop = ShadowStop::ReachedTEnd;
  std::string reason;
};

struct ShadowOdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double dt_init = 1e-4;
};

ShadowTrajectory integrate(const ShadowState& init, const ShadowConfig& cfg,
                           double t_end, const ShadowOdeOptions& opts = {});

std::string trajectory_csv(const ShadowTrajectory& traj, int ambient_dim);

enum class LyapunovKind { N3, N4, N5, OmegaPositive };

struct LyapunovSpec {
  LyapunovKind kind = LyapunovKind::N3;
  double C = 10.0;              // > 1
  double kappa = 0.0;           // n5 cutoff weight; default γ2/(c0_margin·min K)
  double eps_underline = 1e-2;  // n5 cutoff scale
};

double lyapunov(const ShadowState& state, const ShadowConfig& cfg,
                const LyapunovSpec& spec);

struct LyapunovReport {
  double min_increment = 0.0;
  bool pass = false;
  int samples = 0;
};

LyapunovReport lyapunov_monotonicity(const ShadowTrajectory& traj,
                                     const ShadowConfig& cfg, const LyapunovSpec& spec);

// §-style diverging scenario: n = 5, flat backend, K = 1 − Σ x_i^4 with exact
// derivatives, single bubble started on the diagonal.
struct ScenarioOptions {
  double lambda0 = 1e4;
  double a0_norm = 1e-2;  // ‖a_0‖, spread evenly over the diagonal
  double t_end = 1e3;
  double rel_tol = 1e-10;
};

struct ScenarioAssertion {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  double first_violation_t = -1.0;
};

struct ScenarioReport {
  ShadowTrajectory trajectory;
  std::vector<ScenarioAssertion> assertions;
  double gamma_rhs = 0.0;  // coefficient in ∂_t λ³ ≥ γ (at t = 0)
  bool all_pass = false;
};

ScenarioReport run_diverging_scenario(const ScenarioOptions& opts);

}  // namespace curvflow

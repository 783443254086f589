#pragma once

#include "curvflow/bubbles.hpp"
#include "curvflow/energy.hpp"

namespace curvflow {

// One fitted pole bubble: pole index 0 = north (θ = 0), 1 = south (θ = π).
struct PoleBubble {
  int pole = 0;
  double alpha = 1.0;
  double lambda = 10.0;
};

struct DecompositionResult {
  std::vector<PoleBubble> bubbles;
  Vec v;               // residual u − Σ α_i φ_i on the grid
  double misfit = 0.0;  // ∫ K u^{4/(n−2)} |u − Σ α_i φ_i|² dμ_{g0}
  // pairings ⟨v, φ_{k,i}⟩_{K u^{4/(n−2)}}, k ∈ {1,2} (φ_3 is odd about the
  // pole axis and drops out in the symmetric model)
  std::vector<std::array<double, 2>> orth_residuals;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;   // max |∂ misfit / ∂(α_i, λ_i)| at the result
  double field_norm2 = 0.0;  // ∫ K u^{4/(n−2)} u² (poor-fit reference scale)
};

// Pole-bubble value on the symmetric grid (sphere backend family).
Vec pole_bubble_on_grid(const SymmetricGrid& grid, int pole, double lambda);

// Weighted least-squares projection onto p ∈ {1,2} pole bubbles by
// Gauss-Newton over (α_i, ln λ_i); never throws on non-convergence.
DecompositionResult fit(const ScalarField& field, const KSpec& K, int p,
                        const std::vector<PoleBubble>& init, int max_iter = 200);

// Quadrature values of the pairings ⟨v, φ_{k,i}⟩ for a given result.
std::vector<std::array<double, 2>> orthogonality_residuals(
    const ScalarField& field, const KSpec& K, const DecompositionResult& result);

std::string decomposition_json(const DecompositionResult& r);

}  // namespace curvflow

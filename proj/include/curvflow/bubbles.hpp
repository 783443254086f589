#pragma once

#include <optional>
#include <string>

#include "curvflow/constants.hpp"
#include "curvflow/geometry.hpp"

namespace curvflow {

struct BubbleParam {
  double alpha = 1.0;   // amplitude α_i > 0
  Vec a;                // concentration point
  double lambda = 1.0;  // concentration scale λ_i > 0
};

struct BubbleEnsemble {
  std::vector<BubbleParam> params;
  // Solution part (ω > 0 regime): overall amplitude α and the handle giving
  // ω(a). Membership of V(ω,p,ε) is a query, not an invariant of the type.
  std::optional<double> solution_alpha;
  std::function<double(const Vec&)> solution_omega;
};

// φ_{a,λ}(x). On the flat backend this is the Aubin-Talenti bubble with
// u_a ≡ 1; on the sphere the same family transported by stereographic
// projection, normalized so φ_{a,λ}(a) = λ^{(n−2)/2} on both backends.
double bubble_eval(const ModelSpace& space, const BubbleParam& p, const Vec& x);

struct BubbleDerivs {
  double phi1 = 0.0;  // φ
  double phi2 = 0.0;  // −λ ∂_λ φ
  Vec phi3;           // (1/λ) ∇_a φ (chart vector; tangential on the sphere)
};

BubbleDerivs bubble_derivs(const ModelSpace& space, const BubbleParam& p, const Vec& x);

// ε_{ij} = (λ_j/λ_i + λ_i/λ_j + λ_i λ_j γ_n G^{2/(2−n)}(a_i,a_j))^{(2−n)/2}.
double epsilon(const ModelSpace& space, const BubbleParam& pi, const BubbleParam& pj);

struct EpsilonDerivs {
  double eps = 0.0;
  double dlam = 0.0;  // λ_i ∂_{λ_i} ε_ij
  Vec da;             // (1/λ_i) ∇_{a_i} ε_ij
};

EpsilonDerivs epsilon_derivs(const ModelSpace& space, const BubbleParam& pi,
                             const BubbleParam& pj);

// Pairwise ε table with the derivative entries the shadow flow consumes.
struct InteractionTable {
  int p = 0;
  std::vector<double> eps;    // p*p, symmetric, diagonal unused
  std::vector<double> dlam;   // λ_i ∂_{λ_i} ε_ij at (i,j)
  std::vector<Vec> da;        // (1/λ_i) ∇_{a_i} ε_ij at (i,j)
  double& eps_at(int i, int j) { return eps[i * p + j]; }
  double eps_at(int i, int j) const { return eps[i * p + j]; }
};

InteractionTable interaction_table(const ModelSpace& space,
                                   const std::vector<BubbleParam>& params);

enum class InteractionKind { Pair1, Pair2, Pair3, SelfNorm, SelfCross2, SelfCross3 };

struct InteractionCheck {
  InteractionKind kind;
  double numeric = 0.0;    // adaptive quadrature over the active backend
  double predicted = 0.0;  // Lemma-style prediction from the constants table
  double ratio = 0.0;      // numeric / predicted where meaningful
  std::string note;
};

// Pair integrals ∫ φ_i^{(n+2)/(n−2)} φ_{k,j} (k per kind; the vector case
// reports the component along the a_i→a_j axis) and self integrals
// ∫ φ^{2n/(n−2)}, ∫ φ^{(n+2)/(n−2)} φ_k. Pair kinds require the flat backend.
InteractionCheck interaction_integral(const ModelSpace& space, InteractionKind kind,
                                      const BubbleParam& pi,
                                      const BubbleParam* pj,
                                      const ConstantsTable& table,
                                      double quad_tol = 1e-9);

}  // namespace curvflow

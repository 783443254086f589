#pragma once

#include <map>
#include <string>

#include "curvflow/common.hpp"

namespace curvflow {

// Radial-integral constants of the bubble calculus for one dimension n,
// plus the derived ratios entering the shadow flow. All values come from
// adaptive quadrature of the explicit radial integrands.
struct ConstantsTable {
  int dim = 0;
  double c1 = 0, c2 = 0, c3 = 0;      // self-interaction normalizers
  double b1 = 0, b2 = 0, b3 = 0;      // bubble-bubble coefficients
  double e1 = 0, e2 = 0, e3 = 0, e4 = 0;  // K-derivative coefficients
  double d1 = 0, d2 = 0;              // mass coefficients (flow convention)

  double gamma1() const { return e1 / c1; }
  double gamma2() const { return e2 / c2; }
  double gamma3() const { return e3 / c3; }
  double gamma4() const { return e4 / c3; }  // pairs with c3 in the a-equation
  double d1_over_c1() const { return d1 / c1; }
  double d2_over_c2() const { return d2 / c2; }
  // Leading energy constant c0 with J ≈ c0 (Σ_i K_i^{-(n-2)/2})^{2/n} on V(p,ε).
  double c0() const { return 4.0 * dim * (dim - 1) * std::pow(c1, 2.0 / dim); }

  std::string to_json() const;
};

inline constexpr const char* kConstantsSchemaVersion = "curvflow-constants-1";

// Value of one registered n-dimensional radial integral
// ω_{n−1} ∫_0^∞ f(r) r^{n−1} dr, adaptively to absolute error < 1e−10.
double radial_integral(const std::string& id, int dim);

const std::vector<std::string>& registered_integrands();

ConstantsTable constants_table(int dim);

struct IdentityReport {
  int dim = 0;
  double gamma32_residual = 0.0;  // |γ3/γ2 − 3|, meaningful for n = 5 only
  bool gamma32_applicable = false;
  double e3_two_ways_residual = 0.0;  // the two paper definitions of e3
  double b2_b3_residual = 0.0;        // |b2 − b3| from their distinct integrands
  std::string to_json() const;
};

IdentityReport verify_identities(const ConstantsTable& table);

}  // namespace curvflow

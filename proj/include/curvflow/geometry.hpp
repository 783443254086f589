#pragma once

#include <functional>
#include <optional>
#include <string>

#include "curvflow/common.hpp"

namespace curvflow {

enum class Backend { Sphere, Flat };

// Model space: round sphere S^n (points are unit vectors in R^{n+1}) or a
// flat chart of R^n. The mass handle H(a) >= 0 is the regular part of the
// Green's function at its pole; it is zero on the round sphere and a user
// input otherwise.
struct ModelSpace {
  int dim = 3;
  Backend backend = Backend::Flat;
  std::function<double(const Vec&)> mass = [](const Vec&) { return 0.0; };

  int ambient_dim() const { return backend == Backend::Sphere ? dim + 1 : dim; }
  void validate_point(const Vec& x) const;
  double mass_at(const Vec& a) const;
};

ModelSpace make_flat(int dim);
ModelSpace make_sphere(int dim);

// γ_n G^{2/(2−n)} surrogate: squared Euclidean distance on the flat backend,
// squared chordal distance in the ambient embedding on the sphere.
double green_kernel_sq(const ModelSpace& space, const Vec& a, const Vec& b);
// Gradient of green_kernel_sq in the first argument (tangential on sphere).
Vec green_kernel_sq_grad_a(const ModelSpace& space, const Vec& a, const Vec& b);

struct Monomial {
  double coeff = 0.0;
  std::vector<int> powers;
};

// Closed-form prescribed function K: constant, or a polynomial in chart
// coordinates (ambient coordinates on the sphere backend). All derivatives
// are exact.
class KSpec {
 public:
  static KSpec constant(double value);
  static KSpec polynomial(std::vector<Monomial> monomials);

  bool is_constant() const { return constant_.has_value(); }
  double constant_value() const { return constant_.value(); }
  const std::vector<Monomial>& monomials() const { return monomials_; }

  // Raw evaluations in the ambient coordinates (no backend projection).
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  std::vector<Vec> hessian(const Vec& x) const;
  double laplacian(const Vec& x) const;
  Vec gradient_laplacian(const Vec& x) const;

  std::string to_json() const;
  static KSpec from_json(const std::string& text);

 private:
  std::optional<double> constant_;
  std::vector<Monomial> monomials_;
};

struct KEval {
  double K = 0.0;
  Vec gradK;       // chart coordinates; tangential on the sphere backend
  double lapK = 0.0;  // Laplace-Beltrami on the sphere backend
  Vec gradLapK;
};

// K with every derivative the shadow flow needs, in the active backend.
// Throws PositivityError if K(a) <= 0.
KEval kspec_eval(const KSpec& K, const ModelSpace& space, const Vec& a);

enum class CondStatus { Pass, Fail, Inconclusive };

struct CondReport {
  int dim = 0;
  std::string condition;  // "Cond_3".."Cond_5" or primed variants
  CondStatus status = CondStatus::Inconclusive;
  double margin = 0.0;
  Vec witness;
  int critical_points = 0;
};

struct CondOptions {
  int sample_budget = 2000;
  double margin_c = 1e-3;      // the c in Cond_4
  bool prime = false;          // Cond_n': [K = max K] instead of [nabla K = 0]
  bool manifold_not_sphere = true;
  double box_halfwidth = 0.9;  // flat-backend sampling box
  double tube_radius = 0.1;    // Cond_5 neighbourhood of the critical set
  std::uint64_t seed = 0;
};

CondReport check_cond(const KSpec& K, const ModelSpace& space, const CondOptions& opts);

}  // namespace curvflow

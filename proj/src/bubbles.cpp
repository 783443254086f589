#include "curvflow/bubbles.hpp"

#include <algorithm>
#include <cmath>

#include "curvflow/quadrature.hpp"

namespace curvflow {

namespace {

// Internal bubble kernel ρ² = γ_n G_a^{2/(2−n)} in conformal normal
// coordinates at a, and the conformal factor u_a with u_a(a) = 1. On the
// sphere ρ² = c²/(1−c²/4) with c² the squared chordal distance, which makes
// φ_{a,λ} the exact Aubin-Talenti family; the mass H_a vanishes there.
struct Kernel {
  double rho2;  // γ_n G_a^{2/(2−n)}(x)
  double ua;    // u_a(x)
};

Kernel bubble_kernel(const ModelSpace& space, const Vec& a, const Vec& x) {
  const double c2 = green_kernel_sq(space, a, x);
  if (space.backend == Backend::Flat) return {c2, 1.0};
  const double s = 1.0 - 0.25 * c2;  // > 0 away from the antipode
  const double ua = std::pow(std::max(s, 1e-300), -0.25 * (space.dim - 2));
  return {c2 / std::max(s, 1e-300), ua * ua};
}

double profile(int n, double lambda, double rho2) {
  return std::pow(lambda / (1.0 + lambda * lambda * rho2), 0.5 * (n - 2));
}

}  // namespace

double bubble_eval(const ModelSpace& space, const BubbleParam& p, const Vec& x) {
  const Kernel k = bubble_kernel(space, p.a, x);
  return k.ua * profile(space.dim, p.lambda, k.rho2);
}

BubbleDerivs bubble_derivs(const ModelSpace& space, const BubbleParam& p, const Vec& x) {
  const int n = space.dim;
  const Kernel k = bubble_kernel(space, p.a, x);
  BubbleDerivs d;
  d.phi1 = k.ua * profile(n, p.lambda, k.rho2);
  const double l2r2 = sqr(p.lambda) * k.rho2;
  d.phi2 = 0.5 * (n - 2) * d.phi1 * (l2r2 - 1.0) / (l2r2 + 1.0);
  // (1/λ)∇_a φ = −((n−2)/2) φ λ ∇_a ρ² / (1+λ²ρ²) + (∇_a u_a)/(u_a λ) φ.
  // ρ² and u_a are functions of the kernel c² = green_kernel_sq(a,x):
  //   flat:   ρ² = c², u_a ≡ 1
  //   sphere: ρ² = c²/(1−c²/4), u_a = (1−c²/4)^{−(n−2)/2}
  const Vec gc2 = green_kernel_sq_grad_a(space, p.a, x);
  double drho2_dc2 = 1.0, dlogua_dc2 = 0.0;
  if (space.backend == Backend::Sphere) {
    const double c2 = green_kernel_sq(space, p.a, x);
    const double s = 1.0 - 0.25 * c2;
    drho2_dc2 = 1.0 / sqr(s);
    dlogua_dc2 = 0.125 * (n - 2) / s;
  }
  const double coeff =
      -0.5 * (n - 2) * d.phi1 * p.lambda * drho2_dc2 / (1.0 + l2r2) +
      d.phi1 * dlogua_dc2 / p.lambda;
  d.phi3 = coeff * gc2;
  return d;
}

double epsilon(const ModelSpace& space, const BubbleParam& pi, const BubbleParam& pj) {
  const int n = space.dim;
  const double kappa = green_kernel_sq(space, pi.a, pj.a);
  const double D = pj.lambda / pi.lambda + pi.lambda / pj.lambda +
                   pi.lambda * pj.lambda * kappa;
  return std::pow(D, 0.5 * (2 - n));
}

EpsilonDerivs epsilon_derivs(const ModelSpace& space, const BubbleParam& pi,
                             const BubbleParam& pj) {
  const int n = space.dim;
  const double kappa = green_kernel_sq(space, pi.a, pj.a);
  const double D = pj.lambda / pi.lambda + pi.lambda / pj.lambda +
                   pi.lambda * pj.lambda * kappa;
  EpsilonDerivs out;
  out.eps = std::pow(D, 0.5 * (2 - n));
  const double pref = 0.5 * (2 - n) * out.eps / D;
  out.dlam = pref * (pi.lambda / pj.lambda - pj.lambda / pi.lambda +
                     pi.lambda * pj.lambda * kappa);
  out.da = (pref * pj.lambda) * green_kernel_sq_grad_a(space, pi.a, pj.a);
  return out;
}

InteractionTable interaction_table(const ModelSpace& space,
                                   const std::vector<BubbleParam>& params) {
  InteractionTable t;
  t.p = static_cast<int>(params.size());
  t.eps.assign(t.p * t.p, 0.0);
  t.dlam.assign(t.p * t.p, 0.0);
  t.da.assign(t.p * t.p, Vec(space.ambient_dim(), 0.0));
  for (int i = 0; i < t.p; ++i)
    for (int j = 0; j < t.p; ++j) {
      if (i == j) continue;
      EpsilonDerivs d = epsilon_derivs(space, params[i], params[j]);
      t.eps[i * t.p + j] = d.eps;
      t.dlam[i * t.p + j] = d.dlam;
      t.da[i * t.p + j] = std::move(d.da);
    }
  return t;
}

namespace {

// Axisymmetric reduction of a two-center integral over R^n: with F depending
// on s = |x − a_i| and the angle γ to the a_i→a_j axis,
// ∫ F = ω_{n−2} ∫_0^∞ ∫_0^π F(s, γ) s^{n−1} sin^{n−2}γ dγ ds.
double two_center_integral(int n, const std::function<double(double, double)>& F,
                           double scale_i, double scale_j, double d, double tol) {
  auto angular = [&](double s) {
    auto g = [&](double gamma) { return F(s, gamma) * std::pow(std::sin(gamma), n - 2); };
    // the j-bubble shell |x−a_j| = scale_j crosses the sphere of radius s
    // where cosγ = (s² + d² − scale_j²)/(2sd); split there and at the axis hit
    std::vector<double> bp;
    if (d > 0 && s > 1e-14) {
      const double c0 = (s * s + d * d - sqr(scale_j)) / (2 * s * d);
      if (c0 > -1.0 && c0 < 1.0) bp.push_back(std::acos(c0));
      const double c1 = (s * s + d * d) / (2 * s * d);
      if (c1 > -1.0 && c1 < 1.0) bp.push_back(std::acos(c1));
    }
    return integrate_gk(g, 0.0, M_PI, tol * 1e-2, 1e-10, bp, 400).value;
  };
  // Radial cut: beyond R the i-profile dominates everything algebraically.
  const double R = std::max(16.0 * d + 16.0, 64.0 * scale_i);
  std::vector<double> bp{scale_i, 8 * scale_i, 64 * scale_i, 0.5 * d, d - scale_j,
                         d, d + scale_j, 2 * d};
  bp.erase(std::remove_if(bp.begin(), bp.end(),
                          [&](double x) { return !(x > 0.0 && x < R); }),
           bp.end());
  QuadResult q = integrate_gk(angular, 0.0, R, tol, 1e-9, bp, 1200);
  return sphere_area(n - 2) * q.value;
}

double axis_component(const Vec& v, const Vec& axis_unit) { return dot(v, axis_unit); }

}  // namespace

InteractionCheck interaction_integral(const ModelSpace& space, InteractionKind kind,
                                      const BubbleParam& pi, const BubbleParam* pj,
                                      const ConstantsTable& table, double quad_tol) {
  const int n = space.dim;
  const double pexp = double(n + 2) / (n - 2);
  InteractionCheck out;
  out.kind = kind;

  const bool is_pair = kind == InteractionKind::Pair1 || kind == InteractionKind::Pair2 ||
                       kind == InteractionKind::Pair3;
  if (is_pair) {
    if (!pj) throw std::invalid_argument("pair interaction needs a second bubble");
    if (space.backend != Backend::Flat)
      throw std::invalid_argument("pair interaction integrals use the flat backend");
    const double d = std::sqrt(green_kernel_sq(space, pi.a, pj->a));
    // grid must resolve both scales
    if (!(pi.lambda > 32 && pj->lambda > 32))
      throw NumericError("unresolved scales: need lambda >= 32 per unit separation");
    Vec axis(space.dim, 0.0);
    if (d > 0)
      for (int c = 0; c < space.dim; ++c) axis[c] = (pj->a[c] - pi.a[c]) / d;

    auto point_at = [&](double s, double gamma) {
      // position x = a_i + s(cosγ · axis + sinγ · e⊥); by symmetry only
      // |x−a_j|² = s² + d² − 2 s d cosγ matters.
      return s * s + d * d - 2.0 * s * d * std::cos(gamma);
    };
    auto F = [&](double s, double gamma) {
      const double phi_i = profile(n, pi.lambda, s * s);
      const double rj2 = point_at(s, gamma);
      const double phi_j = profile(n, pj->lambda, rj2);
      switch (kind) {
        case InteractionKind::Pair1:
          return std::pow(phi_i, pexp) * phi_j;
        case InteractionKind::Pair2: {
          const double l2r2 = sqr(pj->lambda) * rj2;
          return std::pow(phi_i, pexp) * 0.5 * (n - 2) * phi_j * (l2r2 - 1.0) /
                 (l2r2 + 1.0);
        }
        case InteractionKind::Pair3: {
          // axis component of φ_{3,j} = (n−2) φ_j λ_j (x−a_j) / (1+λ_j²|x−a_j|²)
          const double comp = s * std::cos(gamma) - d;  // (x−a_j)·axis
          return std::pow(phi_i, pexp) * (n - 2) * phi_j * pj->lambda * comp /
                 (1.0 + sqr(pj->lambda) * rj2);
        }
        default:
          return 0.0;
      }
    };
    out.numeric = two_center_integral(n, F, 1.0 / pi.lambda, 1.0 / pj->lambda, d,
                                      quad_tol);
    // Predictions from the appendix closed forms; equivalently b1 · d_{k,j} ε_ij
    // with the derivative acting on the tested bubble j (b1 = (2/(n−2)) b2).
    const EpsilonDerivs dj = epsilon_derivs(space, *pj, pi);  // derivatives in j-slot
    switch (kind) {
      case InteractionKind::Pair1:
        out.predicted = table.b1 * dj.eps;
        break;
      case InteractionKind::Pair2:
        out.predicted = table.b1 * (-dj.dlam);  // b1 · (−λ_j ∂_{λ_j} ε)
        out.note = "prediction b1*(-lambda_j d_lambda_j eps) = (2/(n-2)) b2 * d_2 eps; "
                   "Lemma 3.4(iii) literal b2*d_{2,i} differs by slot and factor";
        break;
      case InteractionKind::Pair3:
        out.predicted = table.b1 * axis_component(dj.da, axis);
        out.note = "prediction b1*(1/lambda_j d_a_j eps), axis component; "
                   "a-derivative direction per the appendix display";
        break;
      default:
        break;
    }
    out.ratio = out.predicted != 0.0 ? out.numeric / out.predicted : 0.0;
    return out;
  }

  // Self integrals: radial about a_i on the flat backend, polar about the
  // bubble center on the sphere.
  auto self_integrand = [&](double phi, double phi2) {
    switch (kind) {
      case InteractionKind::SelfNorm:
        return std::pow(phi, 2.0 * n / (n - 2));
      case InteractionKind::SelfCross2:
        return std::pow(phi, pexp) * phi2;
      default:
        return 0.0;  // SelfCross3 vanishes by parity; asserted below
    }
  };
  if (kind == InteractionKind::SelfCross3) {
    out.numeric = 0.0;  // odd integrand about the center
    out.predicted = 0.0;
    out.note = "vanishes by radial symmetry; Lemma 3.4(iv) bound O(lambda^{2-n})";
    return out;
  }
  if (space.backend == Backend::Flat) {
    auto g = [&](double r) {
      const double phi = profile(n, pi.lambda, r * r);
      const double l2r2 = sqr(pi.lambda) * r * r;
      const double phi2 = 0.5 * (n - 2) * phi * (l2r2 - 1.0) / (l2r2 + 1.0);
      return self_integrand(phi, phi2);
    };
    const double decay = kind == InteractionKind::SelfNorm ? 2.0 * n : double(n + 2);
    out.numeric = radial_integral_nd(g, n, decay, quad_tol, 1e-13);
  } else {
    // polar angle about the bubble center: ω_{n−1} ∫_0^π f(θ) sin^{n−1}θ dθ,
    // with chord² = 2(1−cos θ) independent of where a sits on the sphere
    auto g = [&](double th) {
      const double c2 = 2.0 * (1.0 - std::cos(th));
      const double s = 1.0 - 0.25 * c2;
      const double rho2 = c2 / std::max(s, 1e-300);
      const double ua = std::pow(std::max(s, 1e-300), -0.5 * (n - 2));
      const double phi = ua * profile(n, pi.lambda, rho2);
      const double l2r2 = sqr(pi.lambda) * rho2;
      const double phi2 = 0.5 * (n - 2) * phi * (l2r2 - 1.0) / (l2r2 + 1.0);
      return self_integrand(phi, phi2) * std::pow(std::sin(th), n - 1);
    };
    std::vector<double> bp{1.0 / pi.lambda, 8.0 / pi.lambda, 64.0 / pi.lambda};
    out.numeric =
        sphere_area(n - 1) * integrate_gk(g, 0.0, M_PI, quad_tol, 1e-11, bp, 2000).value;
  }
  out.predicted = kind == InteractionKind::SelfNorm ? table.c1 : 0.0;
  out.ratio = out.predicted != 0.0 ? out.numeric / out.predicted : 0.0;
  return out;
}

}  // namespace curvflow

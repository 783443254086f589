#include "curvflow/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace curvflow {

using nlohmann::json;

void ModelSpace::validate_point(const Vec& x) const {
  if (static_cast<int>(x.size()) != ambient_dim())
    throw InvalidPointError("point has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(ambient_dim()));
  if (backend == Backend::Sphere && std::abs(norm(x) - 1.0) > 1e-9)
    throw InvalidPointError("point is not on the unit sphere (|1-|x|| > 1e-9)");
}

double ModelSpace::mass_at(const Vec& a) const {
  const double h = mass ? mass(a) : 0.0;
  if (h < 0.0) throw PositivityError("mass H(a) must be nonnegative");
  return h;
}

ModelSpace make_flat(int dim) {
  ModelSpace s;
  s.dim = dim;
  s.backend = Backend::Flat;
  return s;
}

ModelSpace make_sphere(int dim) {
  ModelSpace s;
  s.dim = dim;
  s.backend = Backend::Sphere;
  return s;
}

double green_kernel_sq(const ModelSpace& space, const Vec& a, const Vec& b) {
  space.validate_point(a);
  space.validate_point(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += sqr(a[i] - b[i]);
  return s;
}

Vec green_kernel_sq_grad_a(const ModelSpace& space, const Vec& a, const Vec& b) {
  space.validate_point(a);
  space.validate_point(b);
  Vec g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) g[i] = 2.0 * (a[i] - b[i]);
  if (space.backend == Backend::Sphere) {
    const double an = dot(a, g);
    for (std::size_t i = 0; i < a.size(); ++i) g[i] -= an * a[i];
  }
  return g;
}

KSpec KSpec::constant(double value) {
  KSpec k;
  k.constant_ = value;
  return k;
}

KSpec KSpec::polynomial(std::vector<Monomial> monomials) {
  KSpec k;
  k.monomials_ = std::move(monomials);
  return k;
}

double KSpec::value(const Vec& x) const {
  if (constant_) return *constant_;
  double s = 0.0;
  for (const auto& m : monomials_) {
    double t = m.coeff;
    for (std::size_t i = 0; i < m.powers.size() && i < x.size(); ++i)
      for (int p = 0; p < m.powers[i]; ++p) t *= x[i];
    s += t;
  }
  return s;
}

namespace {

// d/dx_j of a monomial, as a monomial (zero coeff when power is zero).
Monomial diff(const Monomial& m, std::size_t j) {
  Monomial d = m;
  if (j >= m.powers.size() || m.powers[j] == 0) {
    d.coeff = 0.0;
    return d;
  }
  d.coeff *= m.powers[j];
  d.powers[j] -= 1;
  return d;
}

double eval_monomial(const Monomial& m, const Vec& x) {
  if (m.coeff == 0.0) return 0.0;
  double t = m.coeff;
  for (std::size_t i = 0; i < m.powers.size() && i < x.size(); ++i)
    for (int p = 0; p < m.powers[i]; ++p) t *= x[i];
  return t;
}

}  // namespace

Vec KSpec::gradient(const Vec& x) const {
  Vec g(x.size(), 0.0);
  if (constant_) return g;
  for (const auto& m : monomials_)
    for (std::size_t j = 0; j < x.size(); ++j) g[j] += eval_monomial(diff(m, j), x);
  return g;
}

std::vector<Vec> KSpec::hessian(const Vec& x) const {
  std::vector<Vec> h(x.size(), Vec(x.size(), 0.0));
  if (constant_) return h;
  for (const auto& m : monomials_)
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Monomial di = diff(m, i);
      if (di.coeff == 0.0) continue;
      for (std::size_t j = 0; j < x.size(); ++j) h[i][j] += eval_monomial(diff(di, j), x);
    }
  return h;
}

double KSpec::laplacian(const Vec& x) const {
  if (constant_) return 0.0;
  double s = 0.0;
  for (const auto& m : monomials_)
    for (std::size_t j = 0; j < x.size(); ++j) s += eval_monomial(diff(diff(m, j), j), x);
  return s;
}

Vec KSpec::gradient_laplacian(const Vec& x) const {
  Vec g(x.size(), 0.0);
  if (constant_) return g;
  for (const auto& m : monomials_)
    for (std::size_t j = 0; j < x.size(); ++j) {
      const Monomial dj = diff(diff(m, j), j);
      if (dj.coeff == 0.0) continue;
      for (std::size_t k = 0; k < x.size(); ++k) g[k] += eval_monomial(diff(dj, k), x);
    }
  return g;
}

std::string KSpec::to_json() const {
  json j;
  if (constant_) {
    j["kind"] = "constant";
    j["value"] = *constant_;
  } else {
    j["kind"] = "polynomial";
    j["monomials"] = json::array();
    for (const auto& m : monomials_)
      j["monomials"].push_back({{"coeff", m.coeff}, {"powers", m.powers}});
  }
  return j.dump();
}

KSpec KSpec::from_json(const std::string& text) {
  json j = json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return KSpec::constant(j.at("value").get<double>());
  if (kind != "polynomial")
    throw std::invalid_argument("KSpec kind must be 'constant' or 'polynomial'");
  std::vector<Monomial> ms;
  for (const auto& jm : j.at("monomials")) {
    Monomial m;
    m.coeff = jm.at("coeff").get<double>();
    m.powers = jm.at("powers").get<std::vector<int>>();
    ms.push_back(std::move(m));
  }
  return KSpec::polynomial(std::move(ms));
}

namespace {

Vec tangential(const Vec& a, Vec v) {
  const double av = dot(a, v);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= av * a[i];
  return v;
}

// Laplace-Beltrami of an ambient polynomial restricted to S^n, as an ambient
// polynomial-valued expression: Δ_S f = Δf − x^T Hess f x − n <x, ∇f>.
double sphere_laplacian(const KSpec& K, const Vec& x, int n) {
  const auto H = K.hessian(x);
  const Vec g = K.gradient(x);
  double xHx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) xHx += x[i] * dot(H[i], x);
  return K.laplacian(x) - xHx - n * dot(x, g);
}

}  // namespace

KEval kspec_eval(const KSpec& K, const ModelSpace& space, const Vec& a) {
  space.validate_point(a);
  KEval out;
  out.K = K.value(a);
  if (!(out.K > 0.0)) throw PositivityError("K(a) <= 0 at a queried point");
  if (space.backend == Backend::Flat) {
    out.gradK = K.gradient(a);
    out.lapK = K.laplacian(a);
    out.gradLapK = K.gradient_laplacian(a);
    return out;
  }
  const int n = space.dim;
  out.gradK = tangential(a, K.gradient(a));
  out.lapK = sphere_laplacian(K, a, n);
  // ∇(Δ_S K) via the ambient extension g(x) = Δf − Σ_ij x_i x_j ∂²_ij f − n Σ_i x_i ∂_i f;
  // its tangential gradient on |x| = 1 is extension independent.
  const std::size_t d = a.size();
  Vec gradg(d, 0.0);
  {
    const Vec glap = K.gradient_laplacian(a);
    const auto H = K.hessian(a);
    const Vec g1 = K.gradient(a);
    for (std::size_t k = 0; k < d; ++k) {
      double xHx_k = 0.0;  // ∂_k (x^T Hess f x) = 2 (Hx)_k + x^T (∂_k Hess) x
      for (std::size_t i = 0; i < d; ++i) xHx_k += 2.0 * H[k][i] * a[i];
      // third-derivative contraction Σ_ij x_i x_j ∂³_ijk f
      if (!K.is_constant()) {
        for (const auto& m : K.monomials()) {
          Monomial dk = m;
          dk.coeff *= (k < m.powers.size()) ? m.powers[k] : 0;
          if (dk.coeff == 0.0) continue;
          dk.powers[k] -= 1;
          // Hessian of dk contracted with x twice.
          for (std::size_t i = 0; i < d; ++i) {
            Monomial di = dk;
            di.coeff *= (i < dk.powers.size()) ? dk.powers[i] : 0;
            if (di.coeff == 0.0) continue;
            di.powers[i] -= 1;
            for (std::size_t j = 0; j < d; ++j) {
              Monomial dj = di;
              dj.coeff *= (j < di.powers.size()) ? di.powers[j] : 0;
              if (dj.coeff == 0.0) continue;
              dj.powers[j] -= 1;
              xHx_k += a[i] * a[j] * eval_monomial(dj, a);
            }
          }
        }
      }
      double lin_k = g1[k];  // ∂_k (n Σ x_i ∂_i f)/n = ∂_k f + Σ x_i ∂²_ik f
      lin_k += dot(H[k], a);
      gradg[k] = glap[k] - xHx_k - n * lin_k;
    }
  }
  out.gradLapK = tangential(a, gradg);
  return out;
}

namespace {

// Halton low-discrepancy sequence in [0,1]^d.
double halton(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

constexpr int kPrimes[8] = {2, 3, 5, 7, 11, 13, 17, 19};

Vec halton_point(std::uint64_t index, int d) {
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = halton(index + 1, kPrimes[i % 8]);
  return x;
}

Vec sample_point(const ModelSpace& space, std::uint64_t index, double halfwidth,
                 std::uint64_t seed) {
  const int d = space.ambient_dim();
  Vec x = halton_point(index + seed * 977, d);
  if (space.backend == Backend::Flat) {
    for (auto& v : x) v = halfwidth * (2.0 * v - 1.0);
    return x;
  }
  // inverse-transform-free: map cube to sphere via Gaussians would need RNG;
  // use Halton-driven Box-Muller for determinism.
  Vec g(d);
  for (int i = 0; i < d; i += 2) {
    const double u1 = std::max(x[i], 1e-12);
    const double u2 = (i + 1 < d) ? x[(i + 1) % d] : halton(index + 7, 23);
    g[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    if (i + 1 < d) g[i + 1] = std::sqrt(-2.0 * std::log(u1)) * std::sin(2.0 * M_PI * u2);
  }
  const double r = norm(g);
  if (r < 1e-12) return sample_point(space, index + 31, halfwidth, seed);
  for (auto& v : g) v /= r;
  return g;
}

Vec project(const ModelSpace& space, Vec x, double halfwidth) {
  if (space.backend == Backend::Sphere) {
    const double r = norm(x);
    for (auto& v : x) v /= r;
  } else {
    for (auto& v : x) v = std::clamp(v, -halfwidth, halfwidth);
  }
  return x;
}

// Gradient descent on |∇K|² (or ascent on K when `ascend`), with backtracking.
bool descend_to_critical(const KSpec& K, const ModelSpace& space, Vec& x,
                         double halfwidth, bool ascend) {
  auto grad_obj = [&](const Vec& p, double& obj) -> Vec {
    KEval e;
    try {
      e = kspec_eval(K, space, p);
    } catch (const PositivityError&) {
      obj = 1e300;
      return Vec(p.size(), 0.0);
    }
    if (ascend) {
      obj = -e.K;
      return -1.0 * e.gradK;
    }
    obj = norm2(e.gradK);
    // ∇|∇K|² = 2 Hess K ∇K (ambient; tangential part taken below)
    const auto H = K.hessian(p);
    Vec g(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = 2.0 * dot(H[i], e.gradK);
    if (space.backend == Backend::Sphere) g = tangential(p, g);
    return g;
  };
  double obj;
  Vec g = grad_obj(x, obj);
  double step = 0.1;
  for (int it = 0; it < 400; ++it) {
    const double gn = norm(g);
    if (!ascend && std::sqrt(std::max(obj, 0.0)) < 1e-8) return true;
    if (gn < 1e-13) return ascend;  // flat spot: critical for ascent purposes
    Vec trial = project(space, x - (step / gn) * g, halfwidth);
    double obj_t;
    Vec g_t = grad_obj(trial, obj_t);
    if (obj_t < obj - 1e-16) {
      x = trial;
      obj = obj_t;
      g = g_t;
      step = std::min(step * 1.5, 0.5);
    } else {
      step *= 0.5;
      if (step < 1e-14) return !ascend ? std::sqrt(std::max(obj, 0.0)) < 1e-8 : true;
    }
  }
  return !ascend ? std::sqrt(std::max(obj, 0.0)) < 1e-8 : true;
}

}  // namespace

CondReport check_cond(const KSpec& K, const ModelSpace& space, const CondOptions& opts) {
  if (opts.sample_budget < 1) throw std::invalid_argument("sample budget must be >= 1");
  CondReport rep;
  rep.dim = space.dim;
  rep.condition = "Cond_" + std::to_string(space.dim) + (opts.prime ? "'" : "");

  if (!opts.manifold_not_sphere) {
    rep.status = CondStatus::Fail;
    rep.margin = -1.0;
    return rep;
  }
  if (space.dim == 3) {
    rep.status = CondStatus::Pass;
    rep.margin = 1.0;  // manifold clause only
    return rep;
  }

  // Locate the relevant critical set from low-discrepancy seeds.
  std::vector<Vec> crit;
  const int seeds = std::max(8, opts.sample_budget / 8);
  double kmax = -1e300;
  for (int s = 0; s < seeds; ++s) {
    Vec x = sample_point(space, s, opts.box_halfwidth, opts.seed);
    if (!descend_to_critical(K, space, x, opts.box_halfwidth, opts.prime)) continue;
    try {
      kmax = std::max(kmax, kspec_eval(K, space, x).K);
    } catch (const PositivityError&) {
      continue;
    }
    bool dup = false;
    for (const auto& c : crit)
      if (norm(c - x) < 1e-6) {
        dup = true;
        break;
      }
    if (!dup && static_cast<int>(crit.size()) < 256) crit.push_back(x);
  }
  if (opts.prime) {
    // keep only [K = max K]
    std::vector<Vec> top;
    for (const auto& c : crit)
      if (kspec_eval(K, space, c).K >= kmax - 1e-9) top.push_back(c);
    crit.swap(top);
  }
  rep.critical_points = static_cast<int>(crit.size());
  if (crit.empty()) {
    rep.status = CondStatus::Inconclusive;
    rep.margin = 0.0;
    return rep;
  }

  double margin = 1e300;
  Vec witness = crit.front();
  if (space.dim == 4) {
    for (const auto& c : crit) {
      const KEval e = kspec_eval(K, space, c);
      const double m = e.lapK / e.K + opts.margin_c;
      if (m < margin) {
        margin = m;
        witness = c;
      }
    }
  } else {  // dim == 5: tube of radius tube_radius around the critical set
    const int per_point = std::max(4, opts.sample_budget / std::max<int>(1, crit.size()));
    bool any_constraint = false;
    for (const auto& c : crit)
      for (int s = 0; s < per_point; ++s) {
        Vec off = halton_point(s + 1, space.ambient_dim());
        for (auto& v : off) v = opts.tube_radius * (2.0 * v - 1.0);
        Vec x = project(space, c + off, opts.box_halfwidth);
        KEval e;
        try {
          e = kspec_eval(K, space, x);
        } catch (const PositivityError&) {
          continue;
        }
        if (e.lapK >= 0.0) continue;  // constraint only on [ΔK < 0]
        any_constraint = true;
        const double m = dot(e.gradLapK, e.gradK) / sqr(e.lapK) - 1.0 / 3.0;
        if (m < margin) {
          margin = m;
          witness = x;
        }
      }
    if (!any_constraint) margin = 1.0;  // vacuous: [ΔK<0] misses the tube
  }
  rep.margin = margin;
  rep.witness = witness;
  rep.status = margin > 0.0 ? CondStatus::Pass : CondStatus::Fail;
  return rep;
}

}  // namespace curvflow

#include "curvflow/constants.hpp"

#include <cmath>
#include <functional>

#include <nlohmann/json.hpp>

#include "curvflow/quadrature.hpp"

namespace curvflow {

namespace {

struct Integrand {
  std::function<double(double, int)> f;  // f(r, n), radial profile
  std::function<double(int)> prefactor;  // dimension-dependent prefactor
  std::function<double(int)> decay;      // algebraic decay exponent of f
};

// The registered radial forms. Integrals are over R^n:
// value = prefactor(n) * ω_{n−1} ∫_0^∞ f(r,n) r^{n−1} dr.
const std::map<std::string, Integrand>& registry() {
  static const std::map<std::string, Integrand> reg = {
      {"c1",
       {[](double r, int n) { return std::pow(1 + r * r, -n); },
        [](int) { return 1.0; }, [](int n) { return 2.0 * n; }}},
      {"c2",
       {[](double r, int n) { return sqr(r * r - 1) * std::pow(1 + r * r, -(n + 2)); },
        [](int n) { return sqr(n - 2) / 4.0; }, [](int n) { return 2.0 * n; }}},
      {"c3",
       {[](double r, int n) { return r * r * std::pow(1 + r * r, -(n + 2)); },
        [](int n) { return sqr(n - 2) / double(n); }, [](int n) { return 2.0 * n + 2; }}},
      {"b1",
       {[](double r, int n) { return std::pow(1 + r * r, -0.5 * (n + 2)); },
        [](int) { return 1.0; }, [](int n) { return n + 2.0; }}},
      {"b2",
       {[](double r, int n) { return std::pow(1 + r * r, -0.5 * (n + 2)); },
        [](int n) { return 0.5 * (n - 2); }, [](int n) { return n + 2.0; }}},
      {"b2_alt",
       {[](double r, int n) {
          return (r * r - 1) / (r * r + 1) * std::pow(1 + r * r, -0.5 * (n + 2));
        },
        [](int n) { return 0.5 * (n + 2); }, [](int n) { return n + 2.0; }}},
      {"b3",
       {[](double r, int n) { return r * r * std::pow(1 + r * r, -0.5 * (n + 4)); },
        [](int n) { return (n + 2) * (n - 2) / (2.0 * n); },
        [](int n) { return n + 2.0; }}},
      {"e1",
       {[](double r, int n) { return r * r * std::pow(1 + r * r, -n); },
        [](int n) { return 1.0 / (2.0 * n); }, [](int n) { return 2.0 * n - 2; }}},
      {"e2",
       {[](double r, int n) { return r * r * (r * r - 1) * std::pow(1 + r * r, -(n + 1)); },
        [](int n) { return (n - 2) / (4.0 * n); }, [](int n) { return 2.0 * n - 2; }}},
      {"e3",
       {[](double r, int n) { return std::pow(1 + r * r, -n); },
        [](int n) { return (n - 2) / (2.0 * n); }, [](int n) { return 2.0 * n; }}},
      {"e3_alt",
       {[](double r, int n) { return r * r * std::pow(1 + r * r, -(n + 1)); },
        [](int n) { return (n - 2) / double(n); }, [](int n) { return 2.0 * n; }}},
      {"e4",
       {[](double r, int n) { return r * r * std::pow(1 + r * r, -n); },
        [](int n) { return (n - 2) / (4.0 * n * n); }, [](int n) { return 2.0 * n - 2; }}},
      {"d1",
       {[](double r, int n) { return std::pow(r, n - 2) * std::pow(1 + r * r, -n); },
        [](int n) { return 2.0 * (n - 1) / (n - 2); }, [](int n) { return n + 2.0; }}},
      {"d2",
       {[](double r, int n) { return std::pow(r, n - 2) * std::pow(1 + r * r, -n); },
        [](int n) { return (n - 1) * (n - 2) / double(n); },
        [](int n) { return n + 2.0; }}},
      // Deliberately divergent profile, kept registered to exercise the
      // divergence guard (decay exponent equals n).
      {"divergent_test",
       {[](double r, int n) { return std::pow(1 + r * r, -0.5 * n); },
        [](int) { return 1.0; }, [](int n) { return double(n); }}},
  };
  return reg;
}

void require_dim(int dim) {
  if (dim < 3 || dim > 5) throw std::invalid_argument("dim must be 3, 4 or 5");
}

}  // namespace

const std::vector<std::string>& registered_integrands() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : registry()) v.push_back(k);
    return v;
  }();
  return ids;
}

double radial_integral(const std::string& id, int dim) {
  require_dim(dim);
  auto it = registry().find(id);
  if (it == registry().end())
    throw std::invalid_argument("unknown radial integrand id '" + id + "'");
  const Integrand& in = it->second;
  const double raw = radial_integral_nd([&](double r) { return in.f(r, dim); }, dim,
                                        in.decay(dim), 1e-11, 1e-13);
  return in.prefactor(dim) * raw;
}

ConstantsTable constants_table(int dim) {
  require_dim(dim);
  ConstantsTable t;
  t.dim = dim;
  t.c1 = radial_integral("c1", dim);
  t.c2 = radial_integral("c2", dim);
  t.c3 = radial_integral("c3", dim);
  t.b1 = radial_integral("b1", dim);
  t.b2 = radial_integral("b2", dim);
  t.b3 = radial_integral("b3", dim);
  t.e1 = radial_integral("e1", dim);
  t.e2 = radial_integral("e2", dim);
  t.e3 = radial_integral("e3", dim);
  t.e4 = radial_integral("e4", dim);
  t.d1 = radial_integral("d1", dim);
  t.d2 = radial_integral("d2", dim);
  return t;
}

std::string ConstantsTable::to_json() const {
  nlohmann::json j;
  j["schema"] = kConstantsSchemaVersion;
  j["dim"] = dim;
  j["c1"] = c1;
  j["c2"] = c2;
  j["c3"] = c3;
  j["b1"] = b1;
  j["b2"] = b2;
  j["b3"] = b3;
  j["e1"] = e1;
  j["e2"] = e2;
  j["e3"] = e3;
  j["e4"] = e4;
  j["d1"] = d1;
  j["d2"] = d2;
  j["gamma1"] = gamma1();
  j["gamma2"] = gamma2();
  j["gamma3"] = gamma3();
  j["gamma4"] = gamma4();
  j["d1_over_c1"] = d1_over_c1();
  j["d2_over_c2"] = d2_over_c2();
  j["gamma3_over_gamma2"] = gamma3() / gamma2();
  j["c0"] = c0();
  return j.dump(2);
}

IdentityReport verify_identities(const ConstantsTable& t) {
  IdentityReport r;
  r.dim = t.dim;
  r.gamma32_applicable = (t.dim == 5);
  r.gamma32_residual = std::abs(t.gamma3() / t.gamma2() - 3.0);
  r.e3_two_ways_residual = std::abs(t.e3 - radial_integral("e3_alt", t.dim));
  r.b2_b3_residual = std::abs(t.b2 - t.b3);
  return r;
}

std::string IdentityReport::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["gamma32_residual"] = gamma32_residual;
  j["gamma32_applicable"] = gamma32_applicable;
  j["e3_two_ways_residual"] = e3_two_ways_residual;
  j["b2_b3_residual"] = b2_b3_residual;
  return j.dump(2);
}

}  // namespace curvflow

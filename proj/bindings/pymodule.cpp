#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "curvflow/cli.hpp"
#include "curvflow/constants.hpp"
#include "curvflow/decompose.hpp"
#include "curvflow/pdeflow.hpp"
#include "curvflow/shadow.hpp"

namespace py = pybind11;
using namespace curvflow;

namespace {

ModelSpace space_of(const std::string& backend, int dim, double H = 0.0) {
  ModelSpace s = backend == "sphere" ? make_sphere(dim) : make_flat(dim);
  s.mass = [H](const Vec&) { return H; };
  return s;
}

BubbleParam bubble(double alpha, const Vec& a, double lambda) {
  BubbleParam b;
  b.alpha = alpha;
  b.a = a;
  b.lambda = lambda;
  return b;
}

ScalarField field_from(int dim, const Vec& theta, const Vec& u) {
  ScalarField f;
  f.dim = dim;
  f.grid = std::make_shared<SymmetricGrid>(dim, theta);
  f.u = u;
  return f;
}

}  // namespace

PYBIND11_MODULE(_curvflow, m) {
  m.doc() = "prescribed scalar curvature flow laboratory";
  m.attr("__version__") = "1.0.0";
  m.attr("constants_schema") = kConstantsSchemaVersion;

  // constants
  m.def("radial_integral", &radial_integral, py::arg("id"), py::arg("dim"));
  m.def("registered_integrands", [] { return registered_integrands(); });
  m.def("constants_table",
        [](int dim) { return constants_table(dim).to_json(); }, py::arg("dim"),
        "constants table as a JSON string");
  m.def("verify_identities", [](int dim) {
    return verify_identities(constants_table(dim)).to_json();
  });

  // geometry
  m.def("green_kernel_sq",
        [](const std::string& backend, int dim, const Vec& a, const Vec& b) {
          return green_kernel_sq(space_of(backend, dim), a, b);
        },
        py::arg("backend"), py::arg("dim"), py::arg("a"), py::arg("b"));
  m.def("kspec_eval",
        [](const std::string& kjson, const std::string& backend, int dim,
           const Vec& a) {
          const KEval e = kspec_eval(KSpec::from_json(kjson), space_of(backend, dim), a);
          py::dict d;
          d["K"] = e.K;
          d["gradK"] = e.gradK;
          d["lapK"] = e.lapK;
          d["gradLapK"] = e.gradLapK;
          return d;
        },
        py::arg("kspec_json"), py::arg("backend"), py::arg("dim"), py::arg("a"));
  m.def("check_cond",
        [](const std::string& kjson, int dim, int budget, double margin_c, bool prime,
           std::uint64_t seed) {
          CondOptions o;
          o.sample_budget = budget;
          o.margin_c = margin_c;
          o.prime = prime;
          o.seed = seed;
          const CondReport r = check_cond(KSpec::from_json(kjson), make_flat(dim), o);
          py::dict d;
          d["condition"] = r.condition;
          d["status"] = r.status == CondStatus::Pass
                            ? "pass"
                            : r.status == CondStatus::Fail ? "fail" : "inconclusive";
          d["margin"] = r.margin;
          d["witness"] = r.witness;
          d["critical_points"] = r.critical_points;
          return d;
        },
        py::arg("kspec_json"), py::arg("dim"), py::arg("budget") = 2000,
        py::arg("margin_c") = 1e-3, py::arg("prime") = false, py::arg("seed") = 0);

  // bubbles
  m.def("bubble_eval",
        [](const std::string& backend, int dim, const Vec& a, double lambda,
           const Vec& x) {
          return bubble_eval(space_of(backend, dim), bubble(1.0, a, lambda), x);
        },
        py::arg("backend"), py::arg("dim"), py::arg("a"), py::arg("lambda"),
        py::arg("x"));
  m.def("bubble_derivs",
        [](const std::string& backend, int dim, const Vec& a, double lambda,
           const Vec& x) {
          const BubbleDerivs d =
              bubble_derivs(space_of(backend, dim), bubble(1.0, a, lambda), x);
          return py::make_tuple(d.phi1, d.phi2, d.phi3);
        });
  m.def("epsilon",
        [](const std::string& backend, int dim, const Vec& ai, double li, const Vec& aj,
           double lj) {
          return epsilon(space_of(backend, dim), bubble(1, ai, li), bubble(1, aj, lj));
        });
  m.def("epsilon_derivs",
        [](const std::string& backend, int dim, const Vec& ai, double li, const Vec& aj,
           double lj) {
          const EpsilonDerivs d =
              epsilon_derivs(space_of(backend, dim), bubble(1, ai, li), bubble(1, aj, lj));
          return py::make_tuple(d.eps, d.dlam, d.da);
        });

  // energy
  m.def("chebyshev_theta", [](int dim, int M) {
    return SymmetricGrid::chebyshev(dim, M)->theta();
  });
  m.def("quadrature_weights", [](int dim, const Vec& theta) {
    return SymmetricGrid(dim, theta).weights();
  });
  m.def("curvature",
        [](int dim, const Vec& theta, const Vec& u, const std::string& kjson) {
          const CurvatureData c = curvature(field_from(dim, theta, u),
                                            KSpec::from_json(kjson));
          py::dict d;
          d["R"] = c.R;
          d["r"] = c.r;
          d["k"] = c.k;
          d["J"] = c.J;
          d["deltaJ"] = c.deltaJ;
          return d;
        },
        py::arg("dim"), py::arg("theta"), py::arg("u"), py::arg("kspec_json"));
  m.def("first_variation",
        [](int dim, const Vec& theta, const Vec& u, const std::string& kjson,
           const Vec& v) {
          return first_variation(field_from(dim, theta, u), KSpec::from_json(kjson), v);
        });
  m.def("second_variation",
        [](int dim, const Vec& theta, const Vec& u, const std::string& kjson,
           const Vec& v, const Vec& w) {
          return second_variation(field_from(dim, theta, u), KSpec::from_json(kjson), v,
                                  w);
        });

  // pde flow / shadow / decompose / scenario via the validated config path
  m.def("execute",
        [](const std::string& subcommand, const std::string& params_json) {
          const RunConfig rc =
              parse_config(subcommand, nlohmann::json::parse(params_json));
          return execute(rc);
        },
        py::arg("subcommand"), py::arg("params_json"),
        "validate and run a CLI-level operation; returns the exit code");

  m.def("shadow_integrate",
        [](const std::string& params_json) {
          const nlohmann::json j = nlohmann::json::parse(params_json);
          const RunConfig rc = parse_config("shadow", j);
          ShadowConfig cfg;
          const int dim = j.at("dim").get<int>();
          cfg.space = j.value("backend", std::string("flat")) == "sphere"
                          ? make_sphere(dim)
                          : make_flat(dim);
          const double H = j.value("H", 0.0);
          cfg.space.mass = [H](const Vec&) { return H; };
          cfg.mode = j.value("mode", std::string("no-solution")) == "with-solution"
                         ? ShadowMode::WithSolution
                         : ShadowMode::NoSolution;
          if (j.contains("K")) cfg.K = KSpec::from_json(j.at("K").dump());
          const double om = j.value("omega", 1.0);
          cfg.omega = [om](const Vec&) { return om; };
          cfg.solution_alpha = j.value("alpha", 1.0);
          cfg.constants = constants_table(dim);
          cfg.policy = j.value("policy", std::string("leading-energy")) == "frozen"
                           ? RoverKPolicy::Frozen
                           : RoverKPolicy::LeadingEnergy;
          cfg.max_K = j.value("max_K", 1.0);
          ShadowState init;
          for (const auto& jb : j.at("bubbles"))
            init.bubbles.push_back(
                bubble(jb.value("alpha", 1.0), jb.at("a").get<Vec>(),
                       jb.at("lambda").get<double>()));
          ShadowOdeOptions oo;
          oo.rel_tol = j.value("rel_tol", 1e-10);
          const ShadowTrajectory tr =
              integrate(init, cfg, j.at("t_end").get<double>(), oo);
          py::list rows;
          for (const auto& s : tr.samples)
            for (std::size_t i = 0; i < s.bubbles.size(); ++i)
              rows.append(py::make_tuple(s.t, i, s.bubbles[i].alpha,
                                         s.bubbles[i].lambda, s.bubbles[i].a));
          py::dict d;
          d["rows"] = rows;
          d["reason"] = tr.reason;
          return d;
        },
        py::arg("params_json"));

  m.def("run_diverging_scenario",
        [](double lambda0, double a0_norm, double t_end) {
          ScenarioOptions o;
          o.lambda0 = lambda0;
          o.a0_norm = a0_norm;
          o.t_end = t_end;
          const ScenarioReport r = run_diverging_scenario(o);
          py::dict d;
          d["all_pass"] = r.all_pass;
          d["gamma_rhs"] = r.gamma_rhs;
          py::list asrt;
          for (const auto& a : r.assertions)
            asrt.append(py::make_tuple(a.name, a.pass, a.worst));
          d["assertions"] = asrt;
          return d;
        },
        py::arg("lambda0") = 1e4, py::arg("a0_norm") = 1e-2, py::arg("t_end") = 1e3);

  m.def("decompose_fit",
        [](int dim, const Vec& theta, const Vec& u, int p, double init_alpha,
           double init_lambda) {
          std::vector<PoleBubble> init;
          init.push_back({0, init_alpha, init_lambda});
          if (p == 2) init.push_back({1, init_alpha, init_lambda});
          return decomposition_json(
              fit(field_from(dim, theta, u), KSpec::constant(1.0), p, init));
        },
        py::arg("dim"), py::arg("theta"), py::arg("u"), py::arg("p") = 1,
        py::arg("init_alpha") = 1.0, py::arg("init_lambda") = 10.0);

  m.def("version", [] { return version_string(); });

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<PositivityError>(m, "PositivityError");
}

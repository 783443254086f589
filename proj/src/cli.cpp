#include "curvflow/cli.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "curvflow/constants.hpp"
#include "curvflow/decompose.hpp"
#include "curvflow/io.hpp"
#include "curvflow/pdeflow.hpp"
#include "curvflow/shadow.hpp"

namespace curvflow {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += "; ";
    s += x;
  }
  return s;
}

struct Validator {
  const json& j;
  std::string where;
  std::vector<std::string> errors;
  std::set<std::string> seen;

  void unknown_keys() {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!seen.count(it.key()))
        errors.push_back("/" + where + it.key() + ": unknown key");
  }
  bool has(const std::string& key) {
    seen.insert(key);
    return j.contains(key);
  }
  template <typename T>
  T get(const std::string& key, T fallback, bool required = false) {
    seen.insert(key);
    if (!j.contains(key)) {
      if (required) errors.push_back("/" + where + key + ": required key missing");
      return fallback;
    }
    try {
      return j.at(key).get<T>();
    } catch (const json::exception&) {
      errors.push_back("/" + where + key + ": wrong type");
      return fallback;
    }
  }
  void check(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) errors.push_back("/" + where + key + ": " + msg);
  }
};

int require_dim(Validator& v) {
  const int dim = v.get<int>("dim", 3, true);
  v.check(dim >= 3 && dim <= 5, "dim", "dim must be 3,4,5");
  return dim;
}

KSpec kspec_from(Validator& v, const std::string& key) {
  v.seen.insert(key);
  if (!v.j.contains(key)) return KSpec::constant(1.0);
  try {
    return KSpec::from_json(v.j.at(key).dump());
  } catch (const std::exception& e) {
    v.errors.push_back("/" + v.where + key + ": invalid KSpec (" + e.what() + ")");
    return KSpec::constant(1.0);
  }
}

const std::set<std::string> kSubcommands = {
    "constants", "interactions", "flow", "shadow", "decompose", "check-cond",
    "scenario"};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error("config error: " + join(v)), violations(std::move(v)) {}

std::string version_string() {
  return std::string("curvflow 1.0.0 (constants schema ") + kConstantsSchemaVersion +
         ")";
}

RunConfig parse_config(const std::string& subcommand, const json& params) {
  if (!kSubcommands.count(subcommand))
    throw ConfigError({"unknown subcommand '" + subcommand + "'"});
  if (!params.is_object()) throw ConfigError({"config must be a JSON object"});

  Validator v{params, "", {}, {}};
  RunConfig rc;
  rc.subcommand = subcommand;
  rc.seed = v.get<std::uint64_t>("seed", 0);
  rc.emit_gnuplot = v.get<bool>("emit_gnuplot", false);

  if (subcommand == "constants") {
    require_dim(v);
    v.get<std::string>("out", "table.json");
    v.get<bool>("verify", true);
  } else if (subcommand == "check-cond") {
    require_dim(v);
    kspec_from(v, "K");
    v.get<bool>("prime", false);
    const double c = v.get<double>("margin_c", 1e-3);
    v.check(c > 0, "margin_c", "must be positive");
    const int budget = v.get<int>("budget", 2000);
    v.check(budget >= 1, "budget", "sample budget must be >= 1");
    v.get<bool>("manifold_not_sphere", true);
    v.get<double>("box_halfwidth", 0.9);
    v.get<std::string>("out", "cond.json");
  } else if (subcommand == "interactions") {
    require_dim(v);
    const double li = v.get<double>("lambda_i", 1e3);
    const double lj = v.get<double>("lambda_j", 1e3);
    v.check(li > 32 && lj > 32, "lambda_i", "scales must exceed 32");
    const double sep = v.get<double>("separation", 1.0);
    v.check(sep > 0, "separation", "must be positive");
    v.get<double>("tol", 1e-9);
    v.get<std::string>("out", "interactions.json");
  } else if (subcommand == "flow") {
    require_dim(v);
    kspec_from(v, "K");
    const double t_end = v.get<double>("t_end", 0.0, true);
    v.check(t_end > 0, "t_end", "must be positive");
    const int gs = v.get<int>("grid_size", 256);
    v.check(gs >= 8, "grid_size", "grid needs at least 8 points");
    const double dt = v.get<double>("dt_init", 1e-4);
    v.check(dt > 0, "dt_init", "must be positive");
    v.get<double>("tol", 1e-12);
    v.get<double>("dt_max", 1e-2);
    const int oe = v.get<int>("output_every", 25);
    v.check(oe >= 1, "output_every", "must be >= 1");
    const std::string init = v.get<std::string>("init", "cosine");
    v.check(init == "constant" || init == "cosine" || init == "bubble" ||
                init == "file",
            "init", "must be constant|cosine|bubble|file");
    v.get<double>("init_amplitude", 0.3);
    v.get<double>("init_lambda", 10.0);
    if (init == "file") v.get<std::string>("init_file", "", true);
    v.get<std::string>("init_file", "");
    v.get<std::string>("out", "flow.csv");
  } else if (subcommand == "shadow") {
    require_dim(v);
    kspec_from(v, "K");
    const double t_end = v.get<double>("t_end", 0.0, true);
    v.check(t_end > 0, "t_end", "must be positive");
    const std::string backend = v.get<std::string>("backend", "flat");
    v.check(backend == "flat" || backend == "sphere", "backend",
            "must be flat|sphere");
    const std::string mode = v.get<std::string>("mode", "no-solution");
    v.check(mode == "no-solution" || mode == "with-solution", "mode",
            "must be no-solution|with-solution");
    const double H = v.get<double>("H", 0.0);
    v.check(H >= 0, "H", "mass must be nonnegative");
    const double omega = v.get<double>("omega", 1.0);
    v.check(omega > 0, "omega", "must be positive");
    const double alpha = v.get<double>("alpha", 1.0);
    v.check(alpha > 0, "alpha", "must be positive");
    const std::string policy = v.get<std::string>("policy", "leading-energy");
    v.check(policy == "leading-energy" || policy == "frozen", "policy",
            "must be leading-energy|frozen");
    v.get<double>("max_K", 1.0);
    v.get<double>("rel_tol", 1e-10);
    v.get<std::string>("out", "traj.csv");
    v.seen.insert("bubbles");
    if (!params.contains("bubbles") || !params.at("bubbles").is_array() ||
        params.at("bubbles").empty()) {
      v.errors.push_back("/bubbles: required non-empty array");
    } else {
      int idx = 0;
      for (const auto& jb : params.at("bubbles")) {
        const std::string at = "bubbles[" + std::to_string(idx++) + "]";
        if (!jb.is_object() || !jb.contains("a") || !jb.contains("lambda")) {
          v.errors.push_back("/" + at + ": needs keys a, lambda (alpha optional)");
          continue;
        }
        for (auto it = jb.begin(); it != jb.end(); ++it)
          if (it.key() != "a" && it.key() != "lambda" && it.key() != "alpha")
            v.errors.push_back("/" + at + "/" + it.key() + ": unknown key");
        try {
          if (jb.at("lambda").get<double>() <= 0)
            v.errors.push_back("/" + at + "/lambda: must be positive");
          if (jb.contains("alpha") && jb.at("alpha").get<double>() <= 0)
            v.errors.push_back("/" + at + "/alpha: must be positive");
          jb.at("a").get<std::vector<double>>();
        } catch (const json::exception&) {
          v.errors.push_back("/" + at + ": wrong member type");
        }
      }
    }
    if (params.contains("lyapunov")) {
      v.seen.insert("lyapunov");
      const auto& jl = params.at("lyapunov");
      for (auto it = jl.begin(); it != jl.end(); ++it)
        if (it.key() != "kind" && it.key() != "C" && it.key() != "kappa" &&
            it.key() != "eps_underline")
          v.errors.push_back("/lyapunov/" + it.key() + ": unknown key");
      const std::string kind = jl.value("kind", "n3");
      if (kind != "n3" && kind != "n4" && kind != "n5" && kind != "omega-positive")
        v.errors.push_back("/lyapunov/kind: must be n3|n4|n5|omega-positive");
      if (jl.value("C", 10.0) <= 1.0)
        v.errors.push_back("/lyapunov/C: must exceed 1");
    }
  } else if (subcommand == "decompose") {
    require_dim(v);
    v.get<std::string>("input", "", true);
    const int p = v.get<int>("p", 1);
    v.check(p == 1 || p == 2, "p", "p must be 1 or 2");
    kspec_from(v, "K");
    v.get<double>("init_alpha", 1.0);
    v.get<double>("init_lambda", 10.0);
    v.get<double>("init_alpha2", 1.0);
    v.get<double>("init_lambda2", 10.0);
    v.get<std::string>("out", "decomposition.json");
  } else if (subcommand == "scenario") {
    const std::string variant = v.get<std::string>("variant", "", true);
    v.check(variant == "diverge-n5", "variant", "must be diverge-n5");
    const double l0 = v.get<double>("lambda0", 1e4);
    v.check(l0 > 1, "lambda0", "must exceed 1");
    const double a0 = v.get<double>("a0_norm", 1e-2);
    v.check(a0 > 0, "a0_norm", "must be positive");
    const double te = v.get<double>("t_end", 1e3);
    v.check(te > 0, "t_end", "must be positive");
    v.get<std::string>("out", "scenario.json");
  }
  v.unknown_keys();
  if (!v.errors.empty()) throw ConfigError(v.errors);
  rc.params = params;
  return rc;
}

namespace {

int run_constants(const RunConfig& rc) {
  const int dim = rc.params.at("dim").get<int>();
  const ConstantsTable t = constants_table(dim);
  json j = json::parse(t.to_json());
  if (rc.params.value("verify", true)) {
    const IdentityReport rep = verify_identities(t);
    j["identities"] = json::parse(rep.to_json());
  }
  atomic_write(rc.params.value("out", "table.json"), j.dump(2) + "\n");
  return kExitOk;
}

int run_check_cond(const RunConfig& rc) {
  const int dim = rc.params.at("dim").get<int>();
  const KSpec K = rc.params.contains("K") ? KSpec::from_json(rc.params.at("K").dump())
                                          : KSpec::constant(1.0);
  CondOptions opts;
  opts.sample_budget = rc.params.value("budget", 2000);
  opts.margin_c = rc.params.value("margin_c", 1e-3);
  opts.prime = rc.params.value("prime", false);
  opts.manifold_not_sphere = rc.params.value("manifold_not_sphere", true);
  opts.box_halfwidth = rc.params.value("box_halfwidth", 0.9);
  opts.seed = rc.seed;
  const CondReport rep = check_cond(K, make_flat(dim), opts);
  json j;
  j["dim"] = rep.dim;
  j["condition"] = rep.condition;
  j["status"] = rep.status == CondStatus::Pass
                    ? "pass"
                    : rep.status == CondStatus::Fail ? "fail" : "inconclusive";
  j["margin"] = rep.margin;
  j["witness"] = rep.witness;
  j["critical_points"] = rep.critical_points;
  atomic_write(rc.params.value("out", "cond.json"), j.dump(2) + "\n");
  if (rep.status == CondStatus::Inconclusive) return kExitNumericalFailure;
  return rep.status == CondStatus::Pass ? kExitOk : kExitInvariantFailure;
}

int run_interactions(const RunConfig& rc) {
  const int dim = rc.params.at("dim").get<int>();
  const double li = rc.params.value("lambda_i", 1e3);
  const double lj = rc.params.value("lambda_j", 1e3);
  const double sep = rc.params.value("separation", 1.0);
  const double tol = rc.params.value("tol", 1e-9);
  const ModelSpace space = make_flat(dim);
  const ConstantsTable table = constants_table(dim);

  BubbleParam pi, pj;
  pi.a = Vec(dim, 0.0);
  pj.a = Vec(dim, 0.0);
  pj.a[0] = sep;
  pi.lambda = li;
  pj.lambda = lj;

  json checks = json::array();
  bool ok = true;
  auto add = [&](const InteractionCheck& c, const char* name) {
    json jc;
    jc["kind"] = name;
    jc["numeric"] = c.numeric;
    jc["predicted"] = c.predicted;
    jc["ratio"] = c.ratio;
    if (!c.note.empty()) jc["note"] = c.note;
    checks.push_back(jc);
    return c;
  };
  const auto p1 =
      add(interaction_integral(space, InteractionKind::Pair1, pi, &pj, table, tol),
          "pair_1");
  ok = ok && p1.ratio > 0.95 && p1.ratio < 1.05;
  add(interaction_integral(space, InteractionKind::Pair2, pi, &pj, table, tol),
      "pair_2");
  add(interaction_integral(space, InteractionKind::Pair3, pi, &pj, table, tol),
      "pair_3");
  const auto sn =
      add(interaction_integral(space, InteractionKind::SelfNorm, pi, nullptr, table, tol),
          "self_norm");
  ok = ok && std::abs(sn.numeric - table.c1) < 5.0 * std::pow(li, 2.0 - dim);
  const auto sc =
      add(interaction_integral(space, InteractionKind::SelfCross2, pi, nullptr, table,
                               tol),
          "self_cross_2");
  ok = ok && std::abs(sc.numeric) < 10.0 * std::pow(li, 2.0 - dim);

  // closed-form ε-derivatives against central finite differences
  {
    const EpsilonDerivs d = epsilon_derivs(space, pi, pj);
    const double h = 1e-6;
    BubbleParam up = pi, dn = pi;
    up.lambda = li * std::exp(h);
    dn.lambda = li * std::exp(-h);
    const double fd_lam =
        (epsilon(space, up, pj) - epsilon(space, dn, pj)) / (2 * h);
    json jc;
    jc["kind"] = "eps_dlam_fd";
    jc["closed_form"] = d.dlam;
    jc["finite_difference"] = fd_lam;
    const double rel = std::abs(d.dlam - fd_lam) / std::max(1e-300, std::abs(d.dlam));
    jc["rel_err"] = rel;
    ok = ok && rel < 1e-6;
    checks.push_back(jc);

    BubbleParam ap = pi, am = pi;
    const double ha = 1e-6 / li;
    ap.a[0] += ha;
    am.a[0] -= ha;
    const double fd_a =
        (epsilon(space, ap, pj) - epsilon(space, am, pj)) / (2 * ha) / li;
    json ja;
    ja["kind"] = "eps_da_fd";
    ja["closed_form"] = d.da[0];
    ja["finite_difference"] = fd_a;
    const double rela = std::abs(d.da[0] - fd_a) / std::max(1e-300, std::abs(d.da[0]));
    ja["rel_err"] = rela;
    ok = ok && rela < 1e-6;
    checks.push_back(ja);
  }

  json j;
  j["dim"] = dim;
  j["lambda_i"] = li;
  j["lambda_j"] = lj;
  j["separation"] = sep;
  j["eps_ij"] = epsilon(space, pi, pj);
  j["checks"] = checks;
  j["all_within_bounds"] = ok;
  atomic_write(rc.params.value("out", "interactions.json"), j.dump(2) + "\n");
  return ok ? kExitOk : kExitInvariantFailure;
}

int run_flow(const RunConfig& rc) {
  FlowConfig cfg;
  cfg.dim = rc.params.at("dim").get<int>();
  if (rc.params.contains("K")) cfg.K = KSpec::from_json(rc.params.at("K").dump());
  cfg.grid_size = rc.params.value("grid_size", 256);
  cfg.t_end = rc.params.at("t_end").get<double>();
  cfg.dt_init = rc.params.value("dt_init", 1e-4);
  cfg.tol = rc.params.value("tol", 1e-12);
  cfg.dt_max = rc.params.value("dt_max", 1e-2);
  cfg.output_every = rc.params.value("output_every", 25);
  cfg.init = rc.params.value("init", "cosine");
  cfg.init_amplitude = rc.params.value("init_amplitude", 0.3);
  cfg.init_lambda = rc.params.value("init_lambda", 10.0);
  cfg.init_file = rc.params.value("init_file", "");

  const FlowResult res = run_flow(cfg);
  const std::string out = rc.params.value("out", "flow.csv");
  atomic_write(out, res.diagnostics.csv());
  if (rc.emit_gnuplot) {
    std::string gp = "set datafile separator ','\nset key autotitle columnhead\n";
    gp += "set terminal pngcairo size 1200,800\nset output '" + out + ".png'\n";
    gp += "set multiplot layout 2,2\n";
    gp += "plot '" + out + "' using 1:2 with lines title 'J'\n";
    gp += "plot '" + out + "' using 1:9 with lines title '|dJ|'\n";
    gp += "plot '" + out + "' using 1:6 with lines title 'min Rtilde/K'\n";
    gp += "plot '" + out + "' using 1:7 with lines title 'max u', '" + out +
          "' using 1:8 with lines title 'min u'\n";
    gp += "unset multiplot\n";
    atomic_write(out + ".gp", gp);
  }
  if (res.stiffness_failure) {
    std::fprintf(stderr, "flow: %s\n", res.failure_reason.c_str());
    return kExitNumericalFailure;
  }
  bool ok = true;
  for (const auto& c : verify_monotonicity(res.diagnostics, cfg.K)) {
    std::printf("flow check %-32s %s (worst %.3e)\n", c.name.c_str(),
                c.pass ? "pass" : "FAIL", c.worst);
    ok = ok && c.pass;
  }
  return ok ? kExitOk : kExitInvariantFailure;
}

int run_shadow(const RunConfig& rc) {
  ShadowConfig cfg;
  const int dim = rc.params.at("dim").get<int>();
  const bool sphere = rc.params.value("backend", "flat") == "sphere";
  cfg.space = sphere ? make_sphere(dim) : make_flat(dim);
  const double H = rc.params.value("H", 0.0);
  cfg.space.mass = [H](const Vec&) { return H; };
  cfg.mode = rc.params.value("mode", "no-solution") == "with-solution"
                 ? ShadowMode::WithSolution
                 : ShadowMode::NoSolution;
  if (rc.params.contains("K")) cfg.K = KSpec::from_json(rc.params.at("K").dump());
  const double omega = rc.params.value("omega", 1.0);
  cfg.omega = [omega](const Vec&) { return omega; };
  cfg.solution_alpha = rc.params.value("alpha", 1.0);
  cfg.constants = constants_table(dim);
  cfg.policy = rc.params.value("policy", "leading-energy") == "frozen"
                   ? RoverKPolicy::Frozen
                   : RoverKPolicy::LeadingEnergy;
  cfg.max_K = rc.params.value("max_K", 1.0);

  ShadowState init;
  for (const auto& jb : rc.params.at("bubbles")) {
    BubbleParam b;
    b.alpha = jb.value("alpha", 1.0);
    b.lambda = jb.at("lambda").get<double>();
    b.a = jb.at("a").get<std::vector<double>>();
    init.bubbles.push_back(std::move(b));
  }
  ShadowOdeOptions oo;
  oo.rel_tol = rc.params.value("rel_tol", 1e-10);
  const ShadowTrajectory traj =
      integrate(init, cfg, rc.params.at("t_end").get<double>(), oo);
  atomic_write(rc.params.value("out", "traj.csv"),
               trajectory_csv(traj, cfg.space.ambient_dim()));
  if (!traj.reason.empty()) std::printf("shadow: stopped early: %s\n", traj.reason.c_str());

  if (rc.params.contains("lyapunov")) {
    const auto& jl = rc.params.at("lyapunov");
    LyapunovSpec spec;
    const std::string kind = jl.value("kind", "n3");
    spec.kind = kind == "n4" ? LyapunovKind::N4
                : kind == "n5" ? LyapunovKind::N5
                : kind == "omega-positive" ? LyapunovKind::OmegaPositive
                                           : LyapunovKind::N3;
    spec.C = jl.value("C", std::pow(10.0, double(init.bubbles.size())));
    spec.eps_underline = jl.value("eps_underline", 1e-2);
    spec.kappa = jl.value("kappa", 0.0);
    const LyapunovReport rep = lyapunov_monotonicity(traj, cfg, spec);
    std::printf("shadow lyapunov %s: min increment %.3e over %d samples -> %s\n",
                kind.c_str(), rep.min_increment, rep.samples,
                rep.pass ? "pass" : "FAIL");
    if (!rep.pass) return kExitInvariantFailure;
  }
  if (traj.stop == ShadowStop::Stiffness) return kExitNumericalFailure;
  return kExitOk;
}

int run_decompose(const RunConfig& rc) {
  const int dim = rc.params.at("dim").get<int>();
  const int p = rc.params.value("p", 1);
  auto [theta, u] = read_field_csv(rc.params.at("input").get<std::string>());
  ScalarField f;
  f.dim = dim;
  f.grid = std::make_shared<SymmetricGrid>(dim, theta);
  f.u = u;
  const KSpec K = rc.params.contains("K") ? KSpec::from_json(rc.params.at("K").dump())
                                          : KSpec::constant(1.0);
  std::vector<PoleBubble> init;
  init.push_back({0, rc.params.value("init_alpha", 1.0),
                  rc.params.value("init_lambda", 10.0)});
  if (p == 2)
    init.push_back({1, rc.params.value("init_alpha2", 1.0),
                    rc.params.value("init_lambda2", 10.0)});
  const DecompositionResult res = fit(f, K, p, init);
  atomic_write(rc.params.value("out", "decomposition.json"),
               decomposition_json(res) + "\n");
  return kExitOk;
}

int run_scenario(const RunConfig& rc) {
  ScenarioOptions opts;
  opts.lambda0 = rc.params.value("lambda0", 1e4);
  opts.a0_norm = rc.params.value("a0_norm", 1e-2);
  opts.t_end = rc.params.value("t_end", 1e3);
  const ScenarioReport rep = run_diverging_scenario(opts);
  json j;
  j["variant"] = "diverge-n5";
  j["gamma_rhs"] = rep.gamma_rhs;
  j["all_pass"] = rep.all_pass;
  j["assertions"] = json::array();
  for (const auto& a : rep.assertions) {
    json ja;
    ja["name"] = a.name;
    ja["pass"] = a.pass;
    ja["worst"] = a.worst;
    if (a.first_violation_t >= 0) ja["first_violation_t"] = a.first_violation_t;
    j["assertions"].push_back(ja);
    std::printf("scenario %-32s %s\n", a.name.c_str(), a.pass ? "pass" : "FAIL");
  }
  const auto& last = rep.trajectory.samples.back();
  j["final"] = {{"t", last.t},
                {"lambda", last.bubbles[0].lambda},
                {"a", last.bubbles[0].a}};
  atomic_write(rc.params.value("out", "scenario.json"), j.dump(2) + "\n");
  return rep.all_pass ? kExitOk : kExitInvariantFailure;
}

}  // namespace

int execute(const RunConfig& rc) {
  try {
    if (rc.subcommand == "constants") return run_constants(rc);
    if (rc.subcommand == "check-cond") return run_check_cond(rc);
    if (rc.subcommand == "interactions") return run_interactions(rc);
    if (rc.subcommand == "flow") return run_flow(rc);
    if (rc.subcommand == "shadow") return run_shadow(rc);
    if (rc.subcommand == "decompose") return run_decompose(rc);
    if (rc.subcommand == "scenario") return run_scenario(rc);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumericalFailure;
  }
  return kExitConfigError;
}

}  // namespace curvflow

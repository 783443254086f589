#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "curvflow/cli.hpp"
#include "curvflow/io.hpp"

using curvflow::RunConfig;
using nlohmann::json;

namespace {

// Merge --config file (if any) with direct flags; flags win.
json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(curvflow::read_file(path));
  } catch (const json::parse_error& e) {
    std::fprintf(stderr, "config parse error in %s: %s\n", path.c_str(), e.what());
    std::exit(curvflow::kExitConfigError);
  }
  if (!j.is_object()) {
    std::fprintf(stderr, "config %s must hold a JSON object\n", path.c_str());
    std::exit(curvflow::kExitConfigError);
  }
  return j;
}

int dispatch(const std::string& sub, json params, bool emit_gnuplot) {
  if (emit_gnuplot) params["emit_gnuplot"] = true;
  try {
    const RunConfig rc = curvflow::parse_config(sub, params);
    return curvflow::execute(rc);
  } catch (const curvflow::ConfigError& e) {
    for (const auto& v : e.violations)
      std::fprintf(stderr, "config error %s\n", v.c_str());
    return curvflow::kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvflow: prescribed scalar curvature flow laboratory"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "print version and schema");

  std::string cfg_path, out, kspec_path, input, init, variant = "diverge-n5";
  int dim = 0, p = 0, grid = 0, budget = 0;
  double t_end = 0, margin_c = 0, lambda0 = 0, a0n = 0, li = 0, lj = 0, sep = 0;
  std::uint64_t seed = 0;
  bool prime = false, gnuplot = false;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", cfg_path, "JSON config file");
    s->add_option("--out", out, "output path");
    s->add_option("--seed", seed, "deterministic seed");
  };

  auto* c_const = app.add_subcommand("constants", "emit the constants table");
  add_common(c_const);
  c_const->add_option("--dim", dim, "dimension 3..5");

  auto* c_cond = app.add_subcommand("check-cond", "sample the dimensional condition");
  add_common(c_cond);
  c_cond->add_option("--dim", dim, "dimension 3..5");
  c_cond->add_option("--k", kspec_path, "KSpec JSON file");
  c_cond->add_flag("--prime", prime, "check Cond_n' on [K = max K]");
  c_cond->add_option("--margin-c", margin_c, "margin constant c in Cond_4");
  c_cond->add_option("--budget", budget, "sample budget");

  auto* c_int = app.add_subcommand("interactions", "interaction estimate report");
  add_common(c_int);
  c_int->add_option("--dim", dim, "dimension 3..5");
  c_int->add_option("--lambda-i", li, "first scale");
  c_int->add_option("--lambda-j", lj, "second scale");
  c_int->add_option("--separation", sep, "|a_i - a_j|");

  auto* c_flow = app.add_subcommand("flow", "run the conformal-factor flow");
  add_common(c_flow);
  c_flow->add_option("--dim", dim, "dimension 3..5");
  c_flow->add_option("--t-end", t_end, "final time");
  c_flow->add_option("--grid-size", grid, "polar grid points");
  c_flow->add_option("--init", init, "constant|cosine|bubble|file");
  c_flow->add_flag("--emit-gnuplot", gnuplot, "write plotting script next to CSV");

  auto* c_shadow = app.add_subcommand("shadow", "integrate the shadow flow");
  add_common(c_shadow);

  auto* c_dec = app.add_subcommand("decompose", "fit pole bubbles to a field");
  add_common(c_dec);
  c_dec->add_option("--input", input, "field CSV (theta,u)");
  c_dec->add_option("--dim", dim, "dimension 3..5");
  c_dec->add_option("--p", p, "number of pole bubbles (1 or 2)");

  auto* c_scen = app.add_subcommand("scenario", "run a named scenario");
  add_common(c_scen);
  c_scen->add_option("variant", variant, "diverge-n5")->expected(0, 1);
  c_scen->add_option("--lambda0", lambda0, "initial scale");
  c_scen->add_option("--a0-norm", a0n, "initial |a|");
  c_scen->add_option("--t-end", t_end, "final time");

  CLI11_PARSE(app, argc, argv);

  if (version) {
    std::printf("%s\n", curvflow::version_string().c_str());
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::fprintf(stderr, "%s\n", app.help().c_str());
    return curvflow::kExitConfigError;
  }
  CLI::App* sub = app.get_subcommands().front();
  json params = load_config(cfg_path);
  if (seed) params["seed"] = seed;
  if (!out.empty()) params["out"] = out;
  if (dim) params["dim"] = dim;

  const std::string name = sub->get_name();
  if (name == "check-cond") {
    if (!kspec_path.empty()) {
      try {
        params["K"] = json::parse(curvflow::read_file(kspec_path));
      } catch (const std::exception& e) {
        std::fprintf(stderr, "config error /K: %s\n", e.what());
        return curvflow::kExitConfigError;
      }
    }
    if (prime) params["prime"] = true;
    if (margin_c > 0) params["margin_c"] = margin_c;
    if (budget > 0) params["budget"] = budget;
  } else if (name == "interactions") {
    if (li > 0) params["lambda_i"] = li;
    if (lj > 0) params["lambda_j"] = lj;
    if (sep > 0) params["separation"] = sep;
  } else if (name == "flow") {
    if (t_end > 0) params["t_end"] = t_end;
    if (grid > 0) params["grid_size"] = grid;
    if (!init.empty()) params["init"] = init;
  } else if (name == "decompose") {
    if (!input.empty()) params["input"] = input;
    if (p > 0) params["p"] = p;
  } else if (name == "scenario") {
    params["variant"] = variant;
    if (lambda0 > 0) params["lambda0"] = lambda0;
    if (a0n > 0) params["a0_norm"] = a0n;
    if (t_end > 0) params["t_end"] = t_end;
  }
  return dispatch(name, std::move(params), gnuplot);
}

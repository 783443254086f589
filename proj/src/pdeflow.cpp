#include "curvflow/pdeflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "curvflow/bubbles.hpp"
#include "curvflow/io.hpp"

namespace curvflow {

namespace {

void renormalize(ScalarField& f, const KSpec& K) {
  const int n = f.dim;
  const Vec Kv = kspec_on_grid(K, *f.grid);
  double k = 0.0;
  const auto& w = f.grid->weights();
  for (int m = 0; m < f.grid->size(); ++m)
    k += w[m] * Kv[m] * std::pow(f.u[m], 2.0 * n / (n - 2));
  const double s = std::pow(k, -(n - 2.0) / (2.0 * n));
  for (auto& v : f.u) v *= s;
}

}  // namespace

ScalarField initial_field(const FlowConfig& cfg) {
  ScalarField f = make_constant_field(cfg.dim, cfg.grid_size, 1.0);
  if (cfg.init == "constant") {
    // keep u ≡ 1 shape
  } else if (cfg.init == "cosine") {
    for (int m = 0; m < cfg.grid_size; ++m)
      f.u[m] = 1.0 + cfg.init_amplitude * std::cos(f.grid->theta()[m]);
  } else if (cfg.init == "bubble") {
    ModelSpace sph = make_sphere(cfg.dim);
    BubbleParam p;
    p.a = Vec(cfg.dim + 1, 0.0);
    p.a.back() = 1.0;  // north pole: θ = 0
    p.lambda = cfg.init_lambda;
    for (int m = 0; m < cfg.grid_size; ++m) {
      Vec x(cfg.dim + 1, 0.0);
      x[0] = std::sin(f.grid->theta()[m]);
      x.back() = std::cos(f.grid->theta()[m]);
      f.u[m] = bubble_eval(sph, p, x);
    }
  } else if (cfg.init == "file") {
    auto [theta, u] = read_field_csv(cfg.init_file);
    f.grid = std::make_shared<SymmetricGrid>(cfg.dim, theta);
    f.u = u;
  } else {
    throw std::invalid_argument("unknown init preset '" + cfg.init + "'");
  }
  renormalize(f, cfg.K);
  return f;
}

FlowState make_state(ScalarField field, const KSpec& K, double dt_init) {
  FlowState s;
  renormalize(field, K);
  s.field = std::move(field);
  s.cc = curvature(s.field, K);
  s.dt_next = dt_init;
  return s;
}

FlowState step(const FlowState& state, const KSpec& K, double dt, double tol) {
  const ScalarField& f = state.field;
  const auto& g = *f.grid;
  const int n = f.dim, M = g.size();
  const double cn = conformal_cn(n), R0 = n * (n - 1);
  const Vec Kv = kspec_on_grid(K, g);
  const double r_over_k = state.cc.r / state.cc.k;

  double try_dt = dt;
  while (true) {
    if (try_dt < 1e-12)
      throw NumericError("stiffness failure: dt underflow in pde step at t=" +
                         std::to_string(state.t));
    // (I + dt·diag(u^{-4/(n-2)}/K)(−c_nΔ)) u_new
    //   = u + dt(−u^{-4/(n-2)} R0 u / K + (r/k) u)
    Vec scale(M), rhs(M);
    for (int m = 0; m < M; ++m) {
      const double D = std::pow(f.u[m], -4.0 / (n - 2)) / Kv[m];
      scale[m] = try_dt * D;
      rhs[m] = f.u[m] * (1.0 + try_dt * (r_over_k - D * R0));
    }
    Vec unew;
    bool ok = true;
    try {
      unew = solve_implicit_penta(g, scale, cn, rhs);
    } catch (const NumericError&) {
      ok = false;
    }
    if (ok)
      for (double v : unew)
        if (!(v > 0.0)) {
          ok = false;
          break;
        }
    if (ok) {
      FlowState next;
      next.field.dim = n;
      next.field.grid = f.grid;
      next.field.u = std::move(unew);
      renormalize(next.field, K);
      next.cc = curvature(next.field, K);
      if (next.cc.J <= state.cc.J + tol) {
        next.t = state.t + try_dt;
        next.int_r_over_k =
            state.int_r_over_k +
            0.5 * try_dt * (r_over_k + next.cc.r / next.cc.k);
        // right-endpoint accumulation keeps the discrete energy inequality
        // one-sided (the K ≡ 1 case is an equality in the continuum)
        next.int_deltaJ2 = state.int_deltaJ2 + try_dt * sqr(next.cc.deltaJ);
        next.dt_next = try_dt;
        return next;
      }
    }
    try_dt *= 0.5;
  }
}

namespace {

FlowRow make_row(const FlowState& s, const Vec& Kv, int n) {
  FlowRow row;
  row.t = s.t;
  row.J = s.cc.J;
  row.r = s.cc.r;
  row.k = s.cc.k;
  row.minR = *std::min_element(s.cc.R.begin(), s.cc.R.end());
  const double grow = std::exp(4.0 / (n - 2) * s.int_r_over_k);
  double mr = 1e300;
  for (std::size_t m = 0; m < s.cc.R.size(); ++m)
    mr = std::min(mr, grow * s.cc.R[m] / Kv[m]);
  row.minRtildeOverK = mr;
  row.maxU = *std::max_element(s.field.u.begin(), s.field.u.end());
  row.minU = *std::min_element(s.field.u.begin(), s.field.u.end());
  row.deltaJ = s.cc.deltaJ;
  row.intDeltaJ2 = s.int_deltaJ2;
  return row;
}

}  // namespace

FlowResult run_flow(const FlowConfig& cfg) {
  FlowResult out;
  FlowState s = make_state(initial_field(cfg), cfg.K, cfg.dt_init);
  const Vec Kv = kspec_on_grid(cfg.K, *s.field.grid);
  out.diagnostics.rows.push_back(make_row(s, Kv, cfg.dim));
  long accepted = 0;
  double dt = cfg.dt_init;
  while (s.t < cfg.t_end - 1e-14 * std::max(1.0, cfg.t_end)) {
    dt = std::min(dt, cfg.t_end - s.t);
    FlowState next;
    try {
      next = step(s, cfg.K, dt, cfg.tol);
    } catch (const NumericError& e) {
      out.stiffness_failure = true;
      out.failure_reason = e.what();
      break;
    }
    // keep dt adaptation gentle: grow slowly, inherit rejections
    if (cfg.adapt_dt) {
      if (next.dt_next < dt)
        dt = next.dt_next;
      else if (accepted % 16 == 15)
        dt = std::min(dt * 1.25, cfg.dt_max);
    }
    s = std::move(next);
    ++accepted;
    if (accepted % cfg.output_every == 0)
      out.diagnostics.rows.push_back(make_row(s, Kv, cfg.dim));
  }
  if (out.diagnostics.rows.empty() || out.diagnostics.rows.back().t != s.t)
    out.diagnostics.rows.push_back(make_row(s, Kv, cfg.dim));
  out.final_state = std::move(s);
  return out;
}

std::string FlowDiagnostics::csv() const {
  std::string s = "t,J,r,k,minR,minRtildeOverK,maxU,minU,deltaJ,intDeltaJ2\n";
  char buf[420];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.t, r.J, r.r, r.k, r.minR, r.minRtildeOverK, r.maxU, r.minU,
                  r.deltaJ, r.intDeltaJ2);
    s += buf;
  }
  return s;
}

std::vector<MonotonicityCheck> verify_monotonicity(const FlowDiagnostics& diag,
                                                   const KSpec&) {
  if (diag.rows.empty()) throw std::invalid_argument("empty diagnostics");
  std::vector<MonotonicityCheck> checks;
  {
    MonotonicityCheck c{"J_nonincreasing", true, 0.0};
    for (std::size_t i = 1; i < diag.rows.size(); ++i)
      c.worst = std::max(c.worst, diag.rows[i].J - diag.rows[i - 1].J);
    c.pass = c.worst < 1e-10;
    checks.push_back(c);
  }
  {
    MonotonicityCheck c{"k_equals_one", true, 0.0};
    for (const auto& r : diag.rows) c.worst = std::max(c.worst, std::abs(r.k - 1.0));
    c.pass = c.worst < 1e-8;
    checks.push_back(c);
  }
  {
    MonotonicityCheck c{"minRtildeOverK_nondecreasing", true, 0.0};
    double runmax = diag.rows.front().minRtildeOverK;
    for (const auto& r : diag.rows) {
      c.worst = std::max(c.worst, runmax - r.minRtildeOverK);
      runmax = std::max(runmax, r.minRtildeOverK);
    }
    c.pass = c.worst < 1e-6;
    checks.push_back(c);
  }
  {
    MonotonicityCheck c{"deltaJ_decayed", true, 0.0};
    c.worst = diag.rows.back().deltaJ - diag.rows.front().deltaJ;
    c.pass = diag.rows.size() < 2 || c.worst < 0.0;
    if (c.pass) c.worst = 0.0;
    checks.push_back(c);
  }
  return checks;
}

}  // namespace curvflow

#include "curvflow/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "curvflow/ode.hpp"

namespace curvflow {

namespace {

void retract(const ModelSpace& space, Vec& a) {
  if (space.backend != Backend::Sphere) return;
  const double r = norm(a);
  if (r <= 0.0) throw InvalidPointError("sphere point collapsed to the origin");
  for (auto& v : a) v /= r;
}

}  // namespace

double r_over_k(const ShadowConfig& cfg, const std::vector<double>& K_at_a) {
  const int n = cfg.space.dim;
  const double c0 = cfg.constants.c0();
  if (cfg.policy == RoverKPolicy::Frozen)
    return c0 / std::pow(cfg.max_K, (n - 2.0) / n);
  double s = 0.0;
  for (double Ki : K_at_a) s += std::pow(Ki, -0.5 * (n - 2));
  return c0 * std::pow(s, 2.0 / n);
}

ShadowRhs shadow_rhs(const ShadowState& state, const ShadowConfig& cfg) {
  const int p = static_cast<int>(state.bubbles.size());
  const int n = cfg.space.dim;
  const ConstantsTable& ct = cfg.constants;

  std::vector<BubbleParam> bub = state.bubbles;
  for (auto& b : bub) {
    retract(cfg.space, b.a);
    if (!(b.alpha > 0.0) || !(b.lambda > 0.0))
      throw std::invalid_argument("bubble parameters must be positive");
  }

  std::vector<KEval> ke(p);
  std::vector<double> Kv(p);
  for (int i = 0; i < p; ++i) {
    ke[i] = kspec_eval(cfg.K, cfg.space, bub[i].a);
    Kv[i] = ke[i].K;
  }
  const InteractionTable table = interaction_table(cfg.space, bub);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (table.eps_at(i, j) >= 0.5)
        throw RegimeExitError("left the shadow regime: eps_ij >= 0.5");

  const double rk = r_over_k(cfg, Kv);
  ShadowRhs rhs;
  rhs.dln_alpha.resize(p);
  rhs.dln_lambda.resize(p);
  rhs.da.resize(p);

  for (int i = 0; i < p; ++i) {
    const double lam = bub[i].lambda, alpha = bub[i].alpha;
    const double a4 = std::pow(alpha, 4.0 / (n - 2));
    // α relaxes to the balance r α^{4/(n−2)} K = 4n(n−1) k  (k ≡ 1 here)
    const double lock = rk * a4 * Kv[i] / (4.0 * n * (n - 1));
    rhs.dln_alpha[i] = -ct.c1 * Kv[i] * a4 * (lock - 1.0);

    double sum_dlam = 0.0;
    Vec sum_da(cfg.space.ambient_dim(), 0.0);
    for (int j = 0; j < p; ++j) {
      if (j == i) continue;
      const double ar = bub[j].alpha / alpha;
      sum_dlam += ar * table.dlam[i * p + j];
      const Vec& daij = table.da[i * p + j];
      for (std::size_t c = 0; c < sum_da.size(); ++c) sum_da[c] += ar * daij[c];
    }

    double mass_term;
    if (cfg.mode == ShadowMode::NoSolution) {
      mass_term = ct.d2_over_c2() * cfg.space.mass_at(bub[i].a) /
                  std::pow(lam, n - 2.0);
      mass_term += ct.gamma2() * ke[i].lapK / (Kv[i] * lam * lam);
    } else {
      if (!cfg.omega) throw std::invalid_argument("with-solution mode needs omega");
      const double wi = cfg.omega(bub[i].a);
      if (!(wi > 0.0)) throw PositivityError("omega(a_i) must be positive");
      mass_term = ct.d2_over_c2() * cfg.solution_alpha * wi /
                  (alpha * Kv[i] * std::pow(lam, 0.5 * (n - 2)));
    }
    rhs.dln_lambda[i] = -rk * (mass_term - ct.b2 / ct.c2 * sum_dlam);

    Vec bracket(cfg.space.ambient_dim(), 0.0);
    for (std::size_t c = 0; c < bracket.size(); ++c) {
      double v = ct.gamma3() * ke[i].gradK[c] / (Kv[i] * lam);
      if (cfg.mode == ShadowMode::NoSolution)
        v += ct.gamma4() * ke[i].gradLapK[c] / (Kv[i] * lam * lam * lam);
      v += ct.b3 / ct.c3 * sum_da[c];
      bracket[c] = v;
    }
    rhs.da[i] = (rk / lam) * bracket;
  }
  return rhs;
}

namespace {

int stride(const ModelSpace& space) { return 2 + space.ambient_dim(); }

Vec pack(const ShadowState& s, const ModelSpace& space) {
  const int st = stride(space);
  Vec y(s.bubbles.size() * st);
  for (std::size_t i = 0; i < s.bubbles.size(); ++i) {
    y[i * st] = std::log(s.bubbles[i].alpha);
    for (int c = 0; c < space.ambient_dim(); ++c) y[i * st + 1 + c] = s.bubbles[i].a[c];
    y[i * st + st - 1] = std::log(s.bubbles[i].lambda);
  }
  return y;
}

ShadowState unpack(double t, const Vec& y, const ModelSpace& space) {
  const int st = stride(space);
  ShadowState s;
  s.t = t;
  s.bubbles.resize(y.size() / st);
  for (std::size_t i = 0; i < s.bubbles.size(); ++i) {
    s.bubbles[i].alpha = std::exp(y[i * st]);
    s.bubbles[i].a.assign(y.begin() + i * st + 1,
                          y.begin() + i * st + 1 + space.ambient_dim());
    s.bubbles[i].lambda = std::exp(y[i * st + st - 1]);
  }
  return s;
}

}  // namespace

ShadowTrajectory integrate(const ShadowState& init, const ShadowConfig& cfg,
                           double t_end, const ShadowOdeOptions& opts) {
  ShadowTrajectory traj;
  const int st = stride(cfg.space);
  Vec y = pack(init, cfg.space);
  double t = init.t;
  traj.samples.push_back({t, init.bubbles});

  auto rhs_fn = [&](double tt, const Vec& yy, Vec& dy) {
    const ShadowState s = unpack(tt, yy, cfg.space);
    const ShadowRhs r = shadow_rhs(s, cfg);
    dy.assign(yy.size(), 0.0);
    for (std::size_t i = 0; i < s.bubbles.size(); ++i) {
      dy[i * st] = r.dln_alpha[i];
      for (int c = 0; c < cfg.space.ambient_dim(); ++c)
        dy[i * st + 1 + c] = r.da[i][c];
      dy[i * st + st - 1] = r.dln_lambda[i];
    }
  };

  bool floor_hit = false;
  auto on_accept = [&](double tt, Vec& yy) {
    if (cfg.space.backend == Backend::Sphere)
      for (std::size_t i = 0; i < yy.size() / st; ++i) {
        Vec a(yy.begin() + i * st + 1, yy.begin() + i * st + 1 + cfg.space.ambient_dim());
        retract(cfg.space, a);
        std::copy(a.begin(), a.end(), yy.begin() + i * st + 1);
      }
    ShadowState s = unpack(tt, yy, cfg.space);
    traj.samples.push_back({tt, s.bubbles});
    for (const auto& b : s.bubbles)
      if (b.lambda < 1.0) {
        floor_hit = true;
        return false;
      }
    return true;
  };

  OdeOptions oo;
  oo.rel_tol = opts.rel_tol;
  oo.abs_tol = opts.abs_tol;
  oo.dt_init = opts.dt_init;
  const OdeStatus status = integrate_dopri5(rhs_fn, t, y, t_end, oo, on_accept);
  switch (status) {
    case OdeStatus::Done:
      traj.stop = ShadowStop::ReachedTEnd;
      break;
    case OdeStatus::Callback:
      traj.stop = floor_hit ? ShadowStop::LambdaFloor : ShadowStop::RegimeExit;
      traj.reason = floor_hit ? "lambda fell below 1 (left the shadow regime)"
                              : "eps_ij reached 0.5 (left the shadow regime)";
      break;
    default:
      traj.stop = ShadowStop::Stiffness;
      traj.reason = "step-size underflow or step budget exhausted";
      break;
  }
  return traj;
}

std::string trajectory_csv(const ShadowTrajectory& traj, int ambient_dim) {
  std::string s = "t,i,alpha,lambda";
  for (int c = 1; c <= ambient_dim; ++c) s += ",a_" + std::to_string(c);
  s += "\n";
  char buf[64];
  for (const auto& smp : traj.samples)
    for (std::size_t i = 0; i < smp.bubbles.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu", smp.t, i);
      s += buf;
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", smp.bubbles[i].alpha,
                    smp.bubbles[i].lambda);
      s += buf;
      for (int c = 0; c < ambient_dim; ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g", smp.bubbles[i].a[c]);
        s += buf;
      }
      s += "\n";
    }
  return s;
}

namespace {

// Smootherstep cutoff: 0 below eps, 1 above 2*eps, |η'| ≤ 1.875/eps.
double eta_cutoff(double s, double eps) {
  if (s <= eps) return 0.0;
  if (s >= 2.0 * eps) return 1.0;
  const double x = (s - eps) / eps;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

}  // namespace

double lyapunov(const ShadowState& state, const ShadowConfig& cfg,
                const LyapunovSpec& spec) {
  if (spec.C <= 1.0) throw std::invalid_argument("Lyapunov C must exceed 1");
  const int p = static_cast<int>(state.bubbles.size());
  std::vector<double> key(p), term(p);
  for (int i = 0; i < p; ++i) {
    const BubbleParam& b = state.bubbles[i];
    const double lnl = std::log(1.0 / b.lambda);
    switch (spec.kind) {
      case LyapunovKind::N3:
      case LyapunovKind::OmegaPositive:
        key[i] = 1.0 / b.lambda;
        term[i] = lnl;
        break;
      case LyapunovKind::N4: {
        const double Ki = kspec_eval(cfg.K, cfg.space, b.a).K;
        key[i] = lnl / Ki;
        term[i] = lnl / Ki;
        break;
      }
      case LyapunovKind::N5: {
        const KEval e = kspec_eval(cfg.K, cfg.space, b.a);
        const double s = -b.lambda * e.lapK;
        const double theta =
            eta_cutoff(s, spec.eps_underline) *
            std::log(std::max(s, 1e-300) / spec.eps_underline);
        key[i] = lnl / e.K - spec.kappa * theta;
        term[i] = key[i];
        break;
      }
    }
  }
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return key[a] > key[b]; });
  double psi = 0.0, Cpow = 1.0;
  for (int s = 0; s < p; ++s) {
    Cpow *= spec.C;  // sorted position s gets C^{s+1}
    psi += Cpow * term[idx[s]];
  }
  return psi;
}

LyapunovReport lyapunov_monotonicity(const ShadowTrajectory& traj,
                                     const ShadowConfig& cfg,
                                     const LyapunovSpec& spec) {
  LyapunovReport rep;
  rep.samples = static_cast<int>(traj.samples.size());
  if (rep.samples < 2) {
    rep.pass = true;
    return rep;
  }
  double prev = 0.0, mininc = 1e300;
  for (int s = 0; s < rep.samples; ++s) {
    ShadowState st;
    st.t = traj.samples[s].t;
    st.bubbles = traj.samples[s].bubbles;
    const double psi = lyapunov(st, cfg, spec);
    if (s > 0) mininc = std::min(mininc, psi - prev);
    prev = psi;
  }
  rep.min_increment = mininc;
  rep.pass = mininc >= -1e-9;
  return rep;
}

ScenarioReport run_diverging_scenario(const ScenarioOptions& opts) {
  ScenarioReport rep;
  const int n = 5;
  ShadowConfig cfg;
  cfg.space = make_flat(n);
  cfg.mode = ShadowMode::NoSolution;  // H ≡ 0 on this model chart
  std::vector<Monomial> ms;
  ms.push_back({1.0, {0, 0, 0, 0, 0}});
  for (int i = 0; i < n; ++i) {
    Monomial m{-1.0, {0, 0, 0, 0, 0}};
    m.powers[i] = 4;
    ms.push_back(m);
  }
  cfg.K = KSpec::polynomial(std::move(ms));
  cfg.constants = constants_table(n);
  cfg.policy = RoverKPolicy::LeadingEnergy;

  ShadowState init;
  BubbleParam b;
  b.a.assign(n, opts.a0_norm / std::sqrt(double(n)));
  b.lambda = opts.lambda0;
  const double rk0 = r_over_k(cfg, {kspec_eval(cfg.K, cfg.space, b.a).K});
  b.alpha = std::pow(4.0 * n * (n - 1) / (rk0 * cfg.K.value(b.a)),
                     (n - 2.0) / 4.0);  // start on the α-balance
  init.bubbles.push_back(b);

  ShadowOdeOptions oo;
  oo.rel_tol = opts.rel_tol;
  oo.dt_init = 1e-3;
  rep.trajectory = integrate(init, cfg, opts.t_end, oo);
  const auto& smp = rep.trajectory.samples;

  const double K0 = cfg.K.value(b.a);
  rep.gamma_rhs = 36.0 * rk0 * cfg.constants.gamma2() * opts.lambda0 *
                  sqr(opts.a0_norm) / K0;

  auto push = [&](ScenarioAssertion a) { rep.assertions.push_back(std::move(a)); };

  {  // λ increasing after transient
    ScenarioAssertion a{"lambda_increasing_after_transient", true, 0.0, -1.0};
    const std::size_t skip = std::max<std::size_t>(2, smp.size() / 100);
    for (std::size_t s = skip + 1; s < smp.size(); ++s) {
      const double dl = smp[s].bubbles[0].lambda - smp[s - 1].bubbles[0].lambda;
      if (dl < -1e-12 * smp[s - 1].bubbles[0].lambda) {
        a.pass = false;
        a.worst = std::min(a.worst, dl);
        if (a.first_violation_t < 0) a.first_violation_t = smp[s].t;
      }
    }
    push(a);
  }
  {  // ‖a‖ non-increasing within 1e−9 per step
    ScenarioAssertion a{"norm_a_nonincreasing", true, 0.0, -1.0};
    for (std::size_t s = 1; s < smp.size(); ++s) {
      const double d = norm(smp[s].bubbles[0].a) - norm(smp[s - 1].bubbles[0].a);
      if (d > 1e-9) {
        a.pass = false;
        a.worst = std::max(a.worst, d);
        if (a.first_violation_t < 0) a.first_violation_t = smp[s].t;
      }
    }
    push(a);
  }
  {  // λ‖a‖² ≥ e^{−0.1} λ0 ‖a0‖²
    ScenarioAssertion a{"lambda_a2_lower_bound", true, 0.0, -1.0};
    const double floor = std::exp(-0.1) * opts.lambda0 * sqr(opts.a0_norm);
    for (const auto& sm : smp) {
      const double v = sm.bubbles[0].lambda * norm2(sm.bubbles[0].a);
      if (v < floor) {
        a.pass = false;
        a.worst = std::min(a.worst, v - floor);
        if (a.first_violation_t < 0) a.first_violation_t = sm.t;
      }
    }
    push(a);
  }
  {  // component ratio below (5/2)^{1/4}
    ScenarioAssertion a{"component_ratio_bound", true, 0.0, -1.0};
    const double bound = std::pow(2.5, 0.25);
    for (const auto& sm : smp) {
      const auto& av = sm.bubbles[0].a;
      const double mx = *std::max_element(av.begin(), av.end());
      const double mn = *std::min_element(av.begin(), av.end());
      const double ratio = mx / mn;
      a.worst = std::max(a.worst, ratio);
      if (!(ratio < bound)) {
        a.pass = false;
        if (a.first_violation_t < 0) a.first_violation_t = sm.t;
      }
    }
    push(a);
  }
  {  // λ(T)³ − λ(0)³ ≥ 0.1 γ T
    ScenarioAssertion a{"lambda_cubed_growth", true, 0.0, -1.0};
    const double lhs = std::pow(smp.back().bubbles[0].lambda, 3) -
                       std::pow(smp.front().bubbles[0].lambda, 3);
    const double T = smp.back().t - smp.front().t;
    a.worst = lhs - 0.1 * rep.gamma_rhs * T;
    a.pass = a.worst >= 0.0;
    push(a);
  }
  {  // d/dt (λ ΔK(a)) ≤ 0 with the remainder channel at zero
    ScenarioAssertion a{"lambda_lapK_nonincreasing", true, 0.0, -1.0};
    double prev = 0.0;
    for (std::size_t s = 0; s < smp.size(); ++s) {
      const double v = smp[s].bubbles[0].lambda *
                       kspec_eval(cfg.K, cfg.space, smp[s].bubbles[0].a).lapK;
      if (s > 0 && v > prev + 1e-9 * std::abs(prev)) {
        a.pass = false;
        a.worst = std::max(a.worst, v - prev);
        if (a.first_violation_t < 0) a.first_violation_t = smp[s].t;
      }
      prev = v;
    }
    push(a);
  }
  rep.all_pass = std::all_of(rep.assertions.begin(), rep.assertions.end(),
                             [](const ScenarioAssertion& a) { return a.pass; });
  return rep;
}

}  // namespace curvflow

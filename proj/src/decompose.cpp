#include "curvflow/decompose.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace curvflow {

namespace {

struct PoleKernel {
  double rho2, ua;  // conformal-normal kernel and u_a at polar angle θ
};

PoleKernel pole_kernel(int pole, double theta) {
  const double c2 = pole == 0 ? 2.0 * (1.0 - std::cos(theta))
                              : 2.0 * (1.0 + std::cos(theta));
  const double s = 1.0 - 0.25 * c2;
  return {c2 / std::max(s, 1e-300), std::pow(std::max(s, 1e-300), -0.5)};
}

// φ and φ₂ = −λ∂_λφ for a pole bubble at angle θ.
void pole_bubble_pair(int n, int pole, double lambda, double theta, double& phi,
                      double& phi2) {
  const PoleKernel k = pole_kernel(pole, theta);
  const double ua = std::pow(k.ua, n - 2);  // (1−c²/4)^{−(n−2)/2}
  const double l2r2 = lambda * lambda * k.rho2;
  phi = ua * std::pow(lambda / (1.0 + l2r2), 0.5 * (n - 2));
  phi2 = 0.5 * (n - 2) * phi * (l2r2 - 1.0) / (l2r2 + 1.0);
}

struct WeightedProblem {
  Vec sw;    // sqrt(w_m K_m u^{4/(n−2)})
  Vec u;     // field values
  int n, M;
  const SymmetricGrid* grid;
};

WeightedProblem make_problem(const ScalarField& field, const KSpec& K) {
  field.validate();
  WeightedProblem P;
  P.grid = field.grid.get();
  P.n = field.dim;
  P.M = field.grid->size();
  P.u = field.u;
  P.sw.resize(P.M);
  const Vec Kv = kspec_on_grid(K, *field.grid);
  for (int m = 0; m < P.M; ++m)
    P.sw[m] = std::sqrt(field.grid->weights()[m] * Kv[m] *
                        std::pow(field.u[m], 4.0 / (P.n - 2)));
  return P;
}

// Solve the small (2p)x(2p) normal equations with Levenberg damping mu.
bool solve_normal(std::vector<double>& JtJ, Vec& Jtr, int dim, double mu, Vec& dx) {
  std::vector<double> A = JtJ;
  for (int i = 0; i < dim; ++i) A[i * dim + i] += mu * (1.0 + A[i * dim + i]);
  dx = Jtr;
  for (int c = 0; c < dim; ++c) {  // dense LU, partial pivoting
    int p = c;
    for (int rr = c + 1; rr < dim; ++rr)
      if (std::abs(A[rr * dim + c]) > std::abs(A[p * dim + c])) p = rr;
    if (A[p * dim + c] == 0.0) return false;
    if (p != c) {
      for (int cc = 0; cc < dim; ++cc) std::swap(A[c * dim + cc], A[p * dim + cc]);
      std::swap(dx[c], dx[p]);
    }
    for (int rr = c + 1; rr < dim; ++rr) {
      const double l = A[rr * dim + c] / A[c * dim + c];
      for (int cc = c; cc < dim; ++cc) A[rr * dim + cc] -= l * A[c * dim + cc];
      dx[rr] -= l * dx[c];
    }
  }
  for (int c = dim - 1; c >= 0; --c) {
    double s = dx[c];
    for (int cc = c + 1; cc < dim; ++cc) s -= A[c * dim + cc] * dx[cc];
    dx[c] = s / A[c * dim + c];
  }
  return true;
}

}  // namespace

Vec pole_bubble_on_grid(const SymmetricGrid& grid, int pole, double lambda) {
  Vec out(grid.size());
  for (int m = 0; m < grid.size(); ++m) {
    double phi, phi2;
    pole_bubble_pair(grid.dim(), pole, lambda, grid.theta()[m], phi, phi2);
    out[m] = phi;
  }
  return out;
}

DecompositionResult fit(const ScalarField& field, const KSpec& K, int p,
                        const std::vector<PoleBubble>& init, int max_iter) {
  if (p != 1 && p != 2)
    throw std::invalid_argument("symmetric-mode fit supports p in {1, 2}");
  if (static_cast<int>(init.size()) != p)
    throw std::invalid_argument("init must supply one bubble per pole slot");
  const WeightedProblem P = make_problem(field, K);

  DecompositionResult res;
  res.bubbles = init;
  for (int i = 0; i < p; ++i)
    if (!(res.bubbles[i].alpha > 0) || !(res.bubbles[i].lambda > 0))
      throw std::invalid_argument("init amplitudes and scales must be positive");

  res.field_norm2 = 0.0;
  for (int m = 0; m < P.M; ++m) res.field_norm2 += sqr(P.sw[m] * P.u[m]);

  const int dim = 2 * p;  // (α_i, ln λ_i)
  Vec resid(P.M), dx;
  std::vector<double> JtJ(dim * dim);
  Vec Jtr(dim);
  std::vector<Vec> cols(dim, Vec(P.M));
  double mu = 0.0;

  auto evaluate = [&](const std::vector<PoleBubble>& bs, Vec& out_resid,
                      std::vector<Vec>* out_cols) {
    double ss = 0.0;
    for (int m = 0; m < P.M; ++m) {
      double model = 0.0;
      for (int i = 0; i < p; ++i) {
        double phi, phi2;
        pole_bubble_pair(P.n, bs[i].pole, bs[i].lambda, P.grid->theta()[m], phi, phi2);
        model += bs[i].alpha * phi;
        if (out_cols) {
          (*out_cols)[2 * i][m] = P.sw[m] * phi;            // ∂model/∂α_i
          (*out_cols)[2 * i + 1][m] = P.sw[m] * bs[i].alpha * (-phi2);  // ∂/∂ln λ_i
        }
      }
      out_resid[m] = P.sw[m] * (P.u[m] - model);
      ss += sqr(out_resid[m]);
    }
    return ss;
  };

  double misfit = evaluate(res.bubbles, resid, &cols);
  int it = 0;
  for (; it < max_iter; ++it) {
    for (int a = 0; a < dim; ++a) {
      Jtr[a] = dot(cols[a], resid);
      for (int b = 0; b <= a; ++b)
        JtJ[a * dim + b] = JtJ[b * dim + a] = dot(cols[a], cols[b]);
    }
    // gradient of misfit wrt (α_i, ln λ_i) is −2 J^T r
    double gmax = 0.0;
    for (int a = 0; a < dim; ++a) {
      double g = 2.0 * std::abs(Jtr[a]);
      if (a % 2 == 1) g /= res.bubbles[a / 2].lambda;  // report wrt λ itself
      gmax = std::max(gmax, g);
    }
    res.grad_norm = gmax;
    if (gmax < 1e-10) {
      res.converged = true;
      break;
    }
    bool improved = false;
    for (int tries = 0; tries < 40 && !improved; ++tries) {
      if (!solve_normal(JtJ, Jtr, dim, mu, dx)) {
        mu = mu == 0.0 ? 1e-8 : mu * 10.0;
        continue;
      }
      std::vector<PoleBubble> trial = res.bubbles;
      bool valid = true;
      for (int i = 0; i < p; ++i) {
        trial[i].alpha += dx[2 * i];
        const double dl = std::clamp(dx[2 * i + 1], -2.0, 2.0);
        trial[i].lambda *= std::exp(dl);
        if (!(trial[i].alpha > 0) || !(trial[i].lambda > 1e-6) ||
            trial[i].lambda > 1e12)
          valid = false;
      }
      Vec trial_resid(P.M);
      const double trial_misfit =
          valid ? evaluate(trial, trial_resid, nullptr) : 1e300;
      if (valid && trial_misfit <= misfit) {
        res.bubbles = trial;
        misfit = evaluate(trial, resid, &cols);
        mu *= 0.3;
        if (mu < 1e-14) mu = 0.0;
        improved = true;
      } else {
        mu = mu == 0.0 ? 1e-8 : mu * 10.0;
      }
    }
    if (!improved) break;  // stalled: report not converged
  }
  res.iterations = it;
  res.misfit = misfit;
  res.v.resize(P.M);
  for (int m = 0; m < P.M; ++m) res.v[m] = resid[m] / P.sw[m];
  ScalarField dummy = field;  // same grid/weights for the pairings
  res.orth_residuals = orthogonality_residuals(dummy, K, res);
  return res;
}

std::vector<std::array<double, 2>> orthogonality_residuals(
    const ScalarField& field, const KSpec& K, const DecompositionResult& result) {
  const WeightedProblem P = make_problem(field, K);
  // rebuild v = u − Σ α φ to stay consistent with the given result
  Vec model(P.M, 0.0);
  for (const auto& b : result.bubbles) {
    for (int m = 0; m < P.M; ++m) {
      double phi, phi2;
      pole_bubble_pair(P.n, b.pole, b.lambda, P.grid->theta()[m], phi, phi2);
      model[m] += b.alpha * phi;
    }
  }
  std::vector<std::array<double, 2>> out(result.bubbles.size());
  for (std::size_t i = 0; i < result.bubbles.size(); ++i) {
    double r1 = 0.0, r2 = 0.0;
    for (int m = 0; m < P.M; ++m) {
      double phi, phi2;
      pole_bubble_pair(P.n, result.bubbles[i].pole, result.bubbles[i].lambda,
                       P.grid->theta()[m], phi, phi2);
      const double wv = sqr(P.sw[m]) * (P.u[m] - model[m]);
      r1 += wv * phi;
      r2 += wv * phi2;
    }
    out[i] = {r1, r2};
  }
  return out;
}

std::string decomposition_json(const DecompositionResult& r) {
  nlohmann::json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["misfit"] = r.misfit;
  j["grad_norm"] = r.grad_norm;
  j["field_norm2"] = r.field_norm2;
  j["poor_fit"] = !r.converged || r.misfit > 1e-2 * r.field_norm2;
  j["bubbles"] = nlohmann::json::array();
  for (const auto& b : r.bubbles)
    j["bubbles"].push_back(
        {{"pole", b.pole}, {"alpha", b.alpha}, {"lambda", b.lambda}});
  j["orth_residuals"] = nlohmann::json::array();
  for (const auto& o : r.orth_residuals)
    j["orth_residuals"].push_back({{"k1", o[0]}, {"k2", o[1]}});
  double vnorm = 0.0;
  for (double x : r.v) vnorm += x * x;
  j["v_l2"] = std::sqrt(vnorm);
  return j.dump(2);
}

}  // namespace curvflow

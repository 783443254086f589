#include "curvflow/energy.hpp"

#include <algorithm>
#include <cmath>

namespace curvflow {

namespace {

// Fornberg weights for the m-th derivative at x0 on the given nodes.
std::vector<double> fornberg(double x0, const std::vector<double>& x, int m) {
  const int nd = static_cast<int>(x.size());
  std::vector<std::vector<std::vector<double>>> delta(
      m + 1, std::vector<std::vector<double>>(nd, std::vector<double>(nd, 0.0)));
  delta[0][0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i < nd; ++i) {
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      for (int k = 0; k <= std::min(i, m); ++k) {
        delta[k][i][j] =
            ((x[i] - x0) * delta[k][i - 1][j] - (k > 0 ? k * delta[k - 1][i - 1][j] : 0.0)) /
            c3;
      }
    }
    for (int k = 0; k <= std::min(i, m); ++k) {
      delta[k][i][i] = c1 / c2 *
                       ((k > 0 ? k * delta[k - 1][i - 1][i - 1] : 0.0) -
                        (x[i - 1] - x0) * delta[k][i - 1][i - 1]);
    }
    c1 = c2;
  }
  std::vector<double> w(nd);
  for (int j = 0; j < nd; ++j) w[j] = delta[m][nd - 1][j];
  return w;
}

// Antiderivative of sin^{n−1}θ for n−1 = 2,3,4.
double sin_power_antideriv(int p, double th) {
  const double s = std::sin(th), c = std::cos(th);
  switch (p) {
    case 2:
      return 0.5 * (th - s * c);
    case 3:
      return -c + c * c * c / 3.0;
    case 4:
      return (3.0 * th - 3.0 * s * c - 2.0 * s * s * s * c) / 8.0;
    default:
      throw std::invalid_argument("sin power must be 2, 3 or 4");
  }
}

}  // namespace

SymmetricGrid::SymmetricGrid(int dim, std::vector<double> theta)
    : dim_(dim), M_(static_cast<int>(theta.size())), theta_(std::move(theta)) {
  if (dim_ < 3 || dim_ > 5) throw std::invalid_argument("dim must be 3, 4 or 5");
  if (M_ < 8) throw std::invalid_argument("grid needs at least 8 points");
  for (int m = 0; m < M_; ++m) {
    if (!(theta_[m] > 0.0 && theta_[m] < M_PI))
      throw std::invalid_argument("grid angles must lie in (0, pi)");
    if (m > 0 && !(theta_[m] > theta_[m - 1]))
      throw std::invalid_argument("grid angles must be strictly increasing");
  }

  // Exact-cell quadrature weights; cells delimited by midpoints, closed by
  // the poles, so the weights telescope to vol(S^n) exactly.
  const double area = sphere_area(dim_ - 1);
  w_.resize(M_);
  double left = 0.0;
  for (int m = 0; m < M_; ++m) {
    const double right = (m + 1 < M_) ? 0.5 * (theta_[m] + theta_[m + 1]) : M_PI;
    w_[m] = area * (sin_power_antideriv(dim_ - 1, right) -
                    sin_power_antideriv(dim_ - 1, left));
    left = right;
  }
  vol_ = 0.0;
  for (double w : w_) vol_ += w;

  // 5-point stencils with even-reflection ghosts at both poles.
  auto node = [&](int j) -> double {
    if (j >= 0 && j < M_) return theta_[j];
    if (j < 0) return -theta_[-j - 1];
    return 2.0 * M_PI - theta_[2 * M_ - 1 - j];
  };
  auto fold = [&](int j) -> int {
    if (j >= 0 && j < M_) return j;
    if (j < 0) return -j - 1;
    return 2 * M_ - 1 - j;
  };
  d1_rows_.resize(M_);
  lap_rows_.resize(M_);
  for (int m = 0; m < M_; ++m) {
    std::vector<double> xs(5);
    for (int s = 0; s < 5; ++s) xs[s] = node(m - 2 + s);
    const auto w1 = fornberg(theta_[m], xs, 1);
    const auto w2 = fornberg(theta_[m], xs, 2);
    const double cot = std::cos(theta_[m]) / std::sin(theta_[m]);
    Row r1, r2;
    const int lo = std::max(0, m - 2), hi = std::min(M_ - 1, m + 2);
    r1.lo = r2.lo = lo;
    for (int s = 0; s < 5; ++s) {
      const int col = fold(m - 2 + s);
      if (col < lo || col > hi)
        throw std::logic_error("stencil fold escaped the band");
      r1.c[col - lo] += w1[s];
      r2.c[col - lo] += w2[s] + (dim_ - 1) * cot * w1[s];
    }
    d1_rows_[m] = r1;
    lap_rows_[m] = r2;
  }
}

std::shared_ptr<const SymmetricGrid> SymmetricGrid::chebyshev(int dim, int M) {
  std::vector<double> th(M);
  for (int m = 0; m < M; ++m)
    th[m] = 0.5 * M_PI * (1.0 - std::cos(M_PI * (m + 1) / (M + 1)));
  return std::make_shared<SymmetricGrid>(dim, std::move(th));
}

Vec SymmetricGrid::d1(const Vec& u) const {
  Vec out(M_, 0.0);
  for (int m = 0; m < M_; ++m) {
    const Row& r = d1_rows_[m];
    double s = 0.0;
    for (int j = 0; j < 5; ++j) {
      const int col = r.lo + j;
      if (col < M_) s += r.c[j] * u[col];
    }
    out[m] = s;
  }
  return out;
}

Vec SymmetricGrid::laplacian(const Vec& u) const {
  Vec out(M_, 0.0);
  for (int m = 0; m < M_; ++m) {
    const Row& r = lap_rows_[m];
    double s = 0.0;
    for (int j = 0; j < 5; ++j) {
      const int col = r.lo + j;
      if (col < M_) s += r.c[j] * u[col];
    }
    out[m] = s;
  }
  return out;
}

Vec solve_implicit_penta(const SymmetricGrid& grid, const Vec& scale, double cn,
                         const Vec& rhs) {
  const int n = grid.size();
  constexpr int kl = 2, ku = 2;
  const int ldab = 2 * kl + ku + 1;  // row index: kl+ku+row-col
  std::vector<double> ab(ldab * n, 0.0);
  auto at = [&](int row, int col) -> double& { return ab[(kl + ku + row - col) * n + col]; };
  for (int m = 0; m < n; ++m) {
    const auto& r = grid.lap_rows()[m];
    for (int j = 0; j < 5; ++j) {
      const int col = r.lo + j;
      if (col >= n) continue;
      at(m, col) += scale[m] * (-cn) * r.c[j];
    }
    at(m, m) += 1.0;
  }
  // banded LU with partial pivoting (LAPACK dgbtrf layout)
  Vec x = rhs;
  std::vector<int> piv(n);
  for (int j = 0; j < n; ++j) {
    const int lastrow = std::min(n - 1, j + kl);
    int p = j;
    for (int i = j + 1; i <= lastrow; ++i)
      if (std::abs(at(i, j)) > std::abs(at(p, j))) p = i;
    piv[j] = p;
    if (at(p, j) == 0.0) throw NumericError("singular implicit operator");
    if (p != j) {
      const int lastcol = std::min(n - 1, j + kl + ku);
      for (int c = j; c <= lastcol; ++c) std::swap(at(j, c), at(p, c));
      std::swap(x[j], x[p]);
    }
    for (int i = j + 1; i <= lastrow; ++i) {
      const double l = at(i, j) / at(j, j);
      at(i, j) = l;
      const int lastcol = std::min(n - 1, j + kl + ku);
      for (int c = j + 1; c <= lastcol; ++c) at(i, c) -= l * at(j, c);
      x[i] -= l * x[j];
    }
  }
  for (int j = n - 1; j >= 0; --j) {
    const int lastcol = std::min(n - 1, j + kl + ku);
    double s = x[j];
    for (int c = j + 1; c <= lastcol; ++c) s -= at(j, c) * x[c];
    x[j] = s / at(j, j);
  }
  return x;
}

void ScalarField::validate() const {
  if (!grid || grid->dim() != dim || static_cast<int>(u.size()) != grid->size())
    throw std::invalid_argument("scalar field inconsistent with its grid");
  for (double v : u)
    if (!(v > 0.0)) throw PositivityError("conformal factor must be positive");
}

ScalarField make_constant_field(int dim, int M, double value) {
  ScalarField f;
  f.dim = dim;
  f.grid = SymmetricGrid::chebyshev(dim, M);
  f.u.assign(M, value);
  return f;
}

Vec kspec_on_grid(const KSpec& K, const SymmetricGrid& grid) {
  Vec out(grid.size());
  for (int m = 0; m < grid.size(); ++m) {
    const Vec x{std::cos(grid.theta()[m])};
    out[m] = K.value(x);
    if (!(out[m] > 0.0)) throw PositivityError("K <= 0 on the grid");
  }
  return out;
}

namespace {

struct EnergyParts {
  Vec Du, Lap, Kv;
  double r, k;
};

EnergyParts parts(const ScalarField& f, const KSpec& K) {
  f.validate();
  const auto& g = *f.grid;
  const int n = f.dim;
  const double cn = conformal_cn(n), R0 = n * (n - 1);
  EnergyParts p;
  p.Du = g.d1(f.u);
  p.Lap = g.laplacian(f.u);
  p.Kv = kspec_on_grid(K, g);
  p.r = 0.0;
  p.k = 0.0;
  const auto& w = g.weights();
  for (int m = 0; m < g.size(); ++m) {
    p.r += w[m] * (cn * sqr(p.Du[m]) + R0 * sqr(f.u[m]));
    p.k += w[m] * p.Kv[m] * std::pow(f.u[m], 2.0 * n / (n - 2));
  }
  return p;
}

}  // namespace

CurvatureData curvature(const ScalarField& f, const KSpec& K) {
  const auto& g = *f.grid;
  const int n = f.dim;
  const double cn = conformal_cn(n), R0 = n * (n - 1);
  const EnergyParts p = parts(f, K);
  CurvatureData c;
  c.R.resize(g.size());
  for (int m = 0; m < g.size(); ++m)
    c.R[m] = std::pow(f.u[m], -(n + 2.0) / (n - 2)) * (-cn * p.Lap[m] + R0 * f.u[m]);
  c.r = p.r;
  c.k = p.k;
  if (!(c.k > 0.0)) throw PositivityError("k must be positive");
  c.J = c.r / std::pow(c.k, (n - 2.0) / n);
  double s = 0.0;
  const auto& w = g.weights();
  for (int m = 0; m < g.size(); ++m)
    s += w[m] * sqr(c.R[m] - (c.r / c.k) * p.Kv[m]) *
         std::pow(f.u[m], 2.0 * n / (n - 2));
  c.deltaJ = 2.0 / std::pow(c.k, (n - 2.0) / n) * std::sqrt(s);
  return c;
}

double first_variation(const ScalarField& f, const KSpec& K, const Vec& v) {
  const auto& g = *f.grid;
  const int n = f.dim;
  const double cn = conformal_cn(n), R0 = n * (n - 1);
  const EnergyParts p = parts(f, K);
  const Vec Dv = g.d1(v);
  const auto& w = g.weights();
  double luv = 0.0, kv = 0.0;
  for (int m = 0; m < g.size(); ++m) {
    luv += w[m] * (cn * p.Du[m] * Dv[m] + R0 * f.u[m] * v[m]);
    kv += w[m] * p.Kv[m] * std::pow(f.u[m], (n + 2.0) / (n - 2)) * v[m];
  }
  return 2.0 / std::pow(p.k, (n - 2.0) / n) * (luv - p.r / p.k * kv);
}

double second_variation(const ScalarField& f, const KSpec& K, const Vec& v,
                        const Vec& w_dir) {
  const auto& g = *f.grid;
  const int n = f.dim;
  const double cn = conformal_cn(n), R0 = n * (n - 1);
  const EnergyParts p = parts(f, K);
  const Vec Dv = g.d1(v), Dw = g.d1(w_dir);
  const auto& wq = g.weights();
  double lvw = 0.0, kvw = 0.0, luv = 0.0, luw = 0.0, kv = 0.0, kw = 0.0;
  for (int m = 0; m < g.size(); ++m) {
    const double um = f.u[m];
    lvw += wq[m] * (cn * Dv[m] * Dw[m] + R0 * v[m] * w_dir[m]);
    kvw += wq[m] * p.Kv[m] * std::pow(um, 4.0 / (n - 2)) * v[m] * w_dir[m];
    luv += wq[m] * (cn * p.Du[m] * Dv[m] + R0 * um * v[m]);
    luw += wq[m] * (cn * p.Du[m] * Dw[m] + R0 * um * w_dir[m]);
    const double kcore = wq[m] * p.Kv[m] * std::pow(um, (n + 2.0) / (n - 2));
    kv += kcore * v[m];
    kw += kcore * w_dir[m];
  }
  const double kpow = std::pow(p.k, (n - 2.0) / n);
  double half = (lvw - (n + 2.0) / (n - 2) * p.r / p.k * kvw) / kpow;
  half -= 2.0 / (kpow * p.k) * (luv * kw + luw * kv);
  half += 4.0 * (n - 1.0) / (n - 2) * p.r / (kpow * p.k * p.k) * kv * kw;
  return 2.0 * half;
}

}  // namespace curvflow

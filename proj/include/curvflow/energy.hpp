#pragma once

#include <array>
#include <memory>

#include "curvflow/geometry.hpp"

namespace curvflow {

// Polar-angle grid on S^n for rotationally symmetric fields u(θ), θ ∈ (0,π),
// with pole regularity handled by even reflection ghosts. Default grid is
// Chebyshev-Lobatto interior points mapped to (0,π); derivative stencils are
// 5-point (4th order) Fornberg weights; quadrature weights integrate
// ω_{n−1} sin^{n−1}θ exactly over midpoint cells, so Σw = vol(S^n) exactly.
class SymmetricGrid {
 public:
  SymmetricGrid(int dim, std::vector<double> theta);
  static std::shared_ptr<const SymmetricGrid> chebyshev(int dim, int M);

  int dim() const { return dim_; }
  int size() const { return M_; }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<double>& weights() const { return w_; }
  double volume() const { return vol_; }

  Vec d1(const Vec& u) const;
  Vec laplacian(const Vec& u) const;  // u'' + (n−1) cot θ · u'

  struct Row {
    int lo = 0;
    std::array<double, 5> c{};  // columns lo .. lo+4 (clipped)
  };
  const std::vector<Row>& lap_rows() const { return lap_rows_; }

 private:
  int dim_, M_;
  std::vector<double> theta_, w_;
  double vol_ = 0.0;
  std::vector<Row> d1_rows_, lap_rows_;
};

// Pentadiagonal solve (I + diag(s) * (−c_n Δ)) x = rhs given the grid rows;
// banded LU with partial pivoting.
Vec solve_implicit_penta(const SymmetricGrid& grid, const Vec& scale, double cn,
                         const Vec& rhs);

struct ScalarField {
  int dim = 3;
  std::shared_ptr<const SymmetricGrid> grid;
  Vec u;

  void validate() const;
};

ScalarField make_constant_field(int dim, int M, double value = 1.0);

// Evaluate an axisymmetric KSpec (constant, or polynomial in x = cos θ) on
// the grid; throws PositivityError if K ≤ 0 anywhere.
Vec kspec_on_grid(const KSpec& K, const SymmetricGrid& grid);

struct CurvatureData {
  Vec R;
  double r = 0.0;
  double k = 0.0;
  double J = 0.0;
  double deltaJ = 0.0;
};

CurvatureData curvature(const ScalarField& field, const KSpec& K);

// Full ∂J(u)v (twice the half-derivative displayed in the paper), with the
// conformal-Laplacian pairing in summation-by-parts (weak) form so that it
// differentiates the discrete J exactly.
double first_variation(const ScalarField& field, const KSpec& K, const Vec& v);

double second_variation(const ScalarField& field, const KSpec& K, const Vec& v,
                        const Vec& w);

}  // namespace curvflow

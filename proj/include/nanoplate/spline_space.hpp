#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "nanoplate/geometry.hpp"
#include "nanoplate/materials.hpp"

namespace nanoplate {

/// Open uniform B-spline basis of degree p on [lo, hi] with n equal cells (C^{p-1} at interior knots).
class BSplineBasis1D {
 public:
  BSplineBasis1D() = default;
  BSplineBasis1D(int degree, int cells, double lo, double hi);

  [[nodiscard]] int degree() const { return p_; }
  [[nodiscard]] int cells() const { return n_; }
  [[nodiscard]] int size() const { return n_ + p_; }
  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }
  [[nodiscard]] double cell_width() const { return (hi_ - lo_) / n_; }
  [[nodiscard]] double knot(int i) const;

  /// Cell containing x; the right end belongs to the last cell.
  [[nodiscard]] int cell_of(double x) const;

  /// Derivatives 0..order of the p+1 functions nonzero on `cell` (indices cell..cell+p), evaluated at x.
  /// out has (order+1) rows and p+1 columns.
  void eval(double x, int cell, int order, Eigen::MatrixXd& out) const;

  /// Greville abscissae, one per basis function.
  [[nodiscard]] std::vector<double> greville() const;

 private:
  int p_ = 3;
  int n_ = 1;
  double lo_ = 0.0;
  double hi_ = 1.0;
};

/// Partial derivatives d^{a+b}/dx^a dy^b for a, b <= 4.
struct Derivatives {
  double d[5][5] = {};

  [[nodiscard]] double value() const { return d[0][0]; }
  [[nodiscard]] Vec2 gradient() const { return {d[1][0], d[0][1]}; }
  [[nodiscard]] Sym2 hessian() const { return {d[2][0], d[1][1], d[0][2]}; }
  [[nodiscard]] Sym3 third() const { return {d[3][0], d[2][1], d[1][2], d[0][3]}; }
  /// Full-index squared norm of the order-k derivative tensor (binomial multiplicities).
  [[nodiscard]] double tensor_norm2(int k) const;
};

/// Local basis table at a point: every partial d^{a+b}/dx^a dy^b with a, b <= order for the
/// (p+1)^2 functions supported there.
struct BasisTable {
  int order = 0;
  int cell_x = 0;
  int cell_y = 0;
  std::vector<int> dofs;
  Eigen::MatrixXd dx;  // (order+1) x (p+1)
  Eigen::MatrixXd dy;  // (order+1) x (p+1)

  [[nodiscard]] int size() const { return static_cast<int>(dofs.size()); }
  /// d^{a+b} N_k / dx^a dy^b for local function k = ky (p+1) + kx.
  [[nodiscard]] double operator()(int a, int b, int k) const {
    const int n = static_cast<int>(dx.cols());
    return dx(a, k % n) * dy(b, k / n);
  }
};

/// Per-basis traces (w, w_n, w_nn) at a boundary point.
struct TraceTable {
  std::vector<int> dofs;
  Eigen::VectorXd value;
  Eigen::VectorXd normal;
  Eigen::VectorXd normal2;
};

/// Tensor-product spline space on a rectangle. DOF (i, j) maps to j (nx + p) + i.
class SplineSpace {
 public:
  SplineSpace(const RectDomain& domain, int degree, int cells_x, int cells_y);

  [[nodiscard]] const RectDomain& domain() const { return domain_; }
  [[nodiscard]] int degree() const { return bx_.degree(); }
  [[nodiscard]] int cells_x() const { return bx_.cells(); }
  [[nodiscard]] int cells_y() const { return by_.cells(); }
  [[nodiscard]] int size() const { return bx_.size() * by_.size(); }
  [[nodiscard]] const BSplineBasis1D& basis_x() const { return bx_; }
  [[nodiscard]] const BSplineBasis1D& basis_y() const { return by_; }
  [[nodiscard]] int dof(int i, int j) const { return j * bx_.size() + i; }
  /// Largest cell side.
  [[nodiscard]] double cell_size() const { return std::max(bx_.cell_width(), by_.cell_width()); }

  /// Throws when max_order exceeds the degree.
  [[nodiscard]] BasisTable eval_basis(const Vec2& x, int max_order) const;
  /// Same, with the cell fixed (used for points on cell edges during assembly).
  [[nodiscard]] BasisTable eval_basis_in_cell(const Vec2& x, int cell_x, int cell_y, int max_order) const;

  /// (w, w_n, w_nn) of every supported basis function at arclength s of the chart.
  [[nodiscard]] TraceTable boundary_trace(const BoundaryChart& chart, Edge edge, double s) const;

  /// Evaluates a coefficient vector.
  [[nodiscard]] Derivatives evaluate(const Eigen::VectorXd& coefficients, const Vec2& x, int max_order) const;

  /// Tensor Greville interpolant of f.
  [[nodiscard]] Eigen::VectorXd interpolate(const std::function<double(const Vec2&)>& f) const;

 private:
  RectDomain domain_;
  BSplineBasis1D bx_;
  BSplineBasis1D by_;
};

}  // namespace nanoplate

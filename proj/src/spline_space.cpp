#include "nanoplate/spline_space.hpp"

#include <cmath>
#include <sstream>

#include "nanoplate/error.hpp"

namespace nanoplate {

BSplineBasis1D::BSplineBasis1D(int degree, int cells, double lo, double hi) : p_(degree), n_(cells), lo_(lo), hi_(hi) {
  require(degree >= 1, "spline degree must be >= 1");
  require(cells >= 1, "spline needs at least one cell");
  require(hi > lo, "spline interval must have positive length");
}

double BSplineBasis1D::knot(int i) const {
  if (i <= p_) return lo_;
  if (i >= n_ + p_) return hi_;
  return lo_ + (i - p_) * cell_width();
}

int BSplineBasis1D::cell_of(double x) const {
  const int c = static_cast<int>(std::floor((x - lo_) / cell_width()));
  return std::clamp(c, 0, n_ - 1);
}

// Derivatives of the nonzero basis functions (knot span cell+p), after Piegl & Tiller.
void BSplineBasis1D::eval(double x, int cell, int order, Eigen::MatrixXd& out) const {
  const int p = p_;
  const int span = cell + p;
  out.setZero(order + 1, p + 1);

  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knot(span + 1 - j);
    right[j] = knot(span + j) - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }
  for (int j = 0; j <= p; ++j) out(0, j) = ndu(j, p);

  const int top = std::min(order, p);
  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a.setZero();
    a(0, 0) = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      out(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= top; ++k) {
    out.row(k) *= factor;
    factor *= (p - k);
  }
}

std::vector<double> BSplineBasis1D::greville() const {
  std::vector<double> g(size());
  for (int i = 0; i < size(); ++i) {
    double s = 0.0;
    for (int k = 1; k <= p_; ++k) s += knot(i + k);
    g[i] = s / p_;
  }
  return g;
}

double Derivatives::tensor_norm2(int k) const {
  double s = 0.0;
  double binom = 1.0;
  for (int a = 0; a <= k; ++a) {
    const double v = d[k - a][a];
    s += binom * v * v;
    binom = binom * (k - a) / (a + 1);
  }
  return s;
}

SplineSpace::SplineSpace(const RectDomain& domain, int degree, int cells_x, int cells_y) : domain_(domain) {
  domain_.validate();
  require(degree >= 3, "spline degree must be >= 3 for H3 conformity");
  bx_ = BSplineBasis1D(degree, cells_x, domain.origin.x(), domain.origin.x() + domain.width);
  by_ = BSplineBasis1D(degree, cells_y, domain.origin.y(), domain.origin.y() + domain.height);
}

BasisTable SplineSpace::eval_basis(const Vec2& x, int max_order) const {
  return eval_basis_in_cell(x, bx_.cell_of(x.x()), by_.cell_of(x.y()), max_order);
}

BasisTable SplineSpace::eval_basis_in_cell(const Vec2& x, int cell_x, int cell_y, int max_order) const {
  if (max_order < 0 || max_order > degree()) {
    std::ostringstream os;
    os << "insufficient smoothness: derivative order " << max_order << " exceeds spline degree " << degree();
    fail(ErrorKind::InvalidInput, os.str());
  }
  BasisTable t;
  t.order = max_order;
  t.cell_x = cell_x;
  t.cell_y = cell_y;
  bx_.eval(x.x(), cell_x, max_order, t.dx);
  by_.eval(x.y(), cell_y, max_order, t.dy);
  const int n = degree() + 1;
  t.dofs.resize(static_cast<std::size_t>(n * n));
  for (int ky = 0; ky < n; ++ky) {
    for (int kx = 0; kx < n; ++kx) t.dofs[ky * n + kx] = dof(cell_x + kx, cell_y + ky);
  }
  return t;
}

TraceTable SplineSpace::boundary_trace(const BoundaryChart& chart, Edge edge, double s) const {
  const BoundaryPoint bp = chart.at(edge, s);
  const BasisTable b = eval_basis(bp.x, 2);
  TraceTable out;
  out.dofs = b.dofs;
  const int m = b.size();
  out.value.resize(m);
  out.normal.resize(m);
  out.normal2.resize(m);
  const double n1 = bp.n.x();
  const double n2 = bp.n.y();
  for (int k = 0; k < m; ++k) {
    out.value[k] = b(0, 0, k);
    out.normal[k] = n1 * b(1, 0, k) + n2 * b(0, 1, k);
    out.normal2[k] = n1 * n1 * b(2, 0, k) + 2.0 * n1 * n2 * b(1, 1, k) + n2 * n2 * b(0, 2, k);
  }
  return out;
}

Derivatives SplineSpace::evaluate(const Eigen::VectorXd& coefficients, const Vec2& x, int max_order) const {
  require(coefficients.size() == size(), "coefficient vector does not match the spline space");
  const BasisTable b = eval_basis(x, max_order);
  Derivatives out;
  for (int a = 0; a <= max_order; ++a) {
    for (int c = 0; a + c <= max_order; ++c) {
      double v = 0.0;
      for (int k = 0; k < b.size(); ++k) v += coefficients[b.dofs[k]] * b(a, c, k);
      out.d[a][c] = v;
    }
  }
  return out;
}

namespace {

Eigen::MatrixXd collocation_matrix(const BSplineBasis1D& basis) {
  const auto g = basis.greville();
  const int n = basis.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd vals;
  for (int i = 0; i < n; ++i) {
    const int c = basis.cell_of(g[i]);
    basis.eval(g[i], c, 0, vals);
    for (int k = 0; k <= basis.degree(); ++k) A(i, c + k) = vals(0, k);
  }
  return A;
}

}  // namespace

Eigen::VectorXd SplineSpace::interpolate(const std::function<double(const Vec2&)>& f) const {
  const auto gx = bx_.greville();
  const auto gy = by_.greville();
  const int nx = bx_.size();
  const int ny = by_.size();
  Eigen::MatrixXd F(nx, ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) F(i, j) = f(Vec2(gx[i], gy[j]));
  }
  const Eigen::MatrixXd Ax = collocation_matrix(bx_);
  const Eigen::MatrixXd Ay = collocation_matrix(by_);
  // F = Ax C Ay^T
  const Eigen::MatrixXd tmp = Ax.partialPivLu().solve(F);
  const Eigen::MatrixXd C = Ay.partialPivLu().solve(tmp.transpose()).transpose();
  Eigen::VectorXd out(size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) out[dof(i, j)] = C(i, j);
  }
  return out;
}

}  // namespace nanoplate

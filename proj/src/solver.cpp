#include "nanoplate/solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/SparseLU>

#include "nanoplate/error.hpp"
#include "nanoplate/quadrature.hpp"

namespace nanoplate {

CoefficientField::CoefficientField(BendingOperators background, BendingOperators inclusion, InclusionSet set)
    : background_(std::move(background)), inclusion_(std::move(inclusion)), set_(std::move(set)) {}

CoefficientField CoefficientField::homogeneous(const BendingOperators& background) {
  return CoefficientField(background, background, InclusionSet{});
}

namespace {

void emit_gauss(const Vec2& lo, const Vec2& hi, const GaussRule& g, const InclusionSet* classify, bool flag,
                std::vector<QuadraturePoint>& out) {
  for_each_gauss_point(g, lo.y(), hi.y(), [&](double y, double wy) {
    for_each_gauss_point(g, lo.x(), hi.x(), [&](double x, double wx) {
      const Vec2 p(x, y);
      out.push_back({p, wx * wy, classify ? classify->contains(p) : flag});
    });
  });
}

void cut_recursive(const Vec2& lo, const Vec2& hi, const InclusionSet& set, const GaussRule& g, int level, int depth,
                   std::vector<QuadraturePoint>& out) {
  const Vec2 center = 0.5 * (lo + hi);
  const double half_diag = 0.5 * (hi - lo).norm();
  const double sd = set.signed_distance_bound(center);
  if (sd > half_diag) {
    emit_gauss(lo, hi, g, nullptr, false, out);
  } else if (sd < -half_diag) {
    emit_gauss(lo, hi, g, nullptr, true, out);
  } else if (level >= depth) {
    emit_gauss(lo, hi, g, &set, false, out);
  } else {
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i) {
        const Vec2 a(i == 0 ? lo.x() : center.x(), j == 0 ? lo.y() : center.y());
        const Vec2 b(i == 0 ? center.x() : hi.x(), j == 0 ? center.y() : hi.y());
        cut_recursive(a, b, set, g, level + 1, depth, out);
      }
    }
  }
}

int resolved_points(const SplineSpace& space, const SolverOptions& o) {
  return o.quadrature_points > 0 ? o.quadrature_points : space.degree() + 2;
}

Vec2 cell_lo(const SplineSpace& s, int cx, int cy) {
  return {s.basis_x().lo() + cx * s.basis_x().cell_width(), s.basis_y().lo() + cy * s.basis_y().cell_width()};
}

Vec2 cell_hi(const SplineSpace& s, int cx, int cy) {
  return {s.basis_x().lo() + (cx + 1) * s.basis_x().cell_width(), s.basis_y().lo() + (cy + 1) * s.basis_y().cell_width()};
}

template <class F>
void parallel_for(int n, int threads, F&& f) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        const int begin = static_cast<int>(static_cast<long>(n) * t / threads);
        const int end = static_cast<int>(static_cast<long>(n) * (t + 1) / threads);
        for (int i = begin; i < end; ++i) f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void cut_cell_quadrature(const Vec2& lo, const Vec2& hi, const InclusionSet& set, int points, int depth,
                         std::vector<QuadraturePoint>& out) {
  const GaussRule& g = gauss_legendre(points);
  if (set.empty()) {
    emit_gauss(lo, hi, g, nullptr, false, out);
    return;
  }
  cut_recursive(lo, hi, set, g, 0, std::max(0, depth), out);
}

CellQuadrature build_cell_quadrature(const SplineSpace& space, const InclusionSet& set, const SolverOptions& options) {
  const int nx = space.cells_x();
  const int ny = space.cells_y();
  CellQuadrature q(static_cast<std::size_t>(nx * ny));
  const int points = resolved_points(space, options);
  parallel_for(nx * ny, options.threads, [&](int c) {
    const int cx = c % nx;
    const int cy = c / nx;
    cut_cell_quadrature(cell_lo(space, cx, cy), cell_hi(space, cx, cy), set, points, options.subcell_depth,
                        q[static_cast<std::size_t>(c)]);
  });
  return q;
}

SparseMatrix assemble_stiffness(const SplineSpace& space, const CoefficientField& field,
                                const CellQuadrature& quadrature, int threads) {
  const int nx = space.cells_x();
  const int ncells = nx * space.cells_y();
  require(static_cast<int>(quadrature.size()) == ncells, "quadrature does not match the spline space");
  const int m = (space.degree() + 1) * (space.degree() + 1);
  constexpr double r2 = std::numbers::sqrt2;
  const double r3 = std::sqrt(3.0);

  std::vector<Eigen::MatrixXd> element(static_cast<std::size_t>(ncells));
  std::vector<std::vector<int>> dofs(static_cast<std::size_t>(ncells));
  parallel_for(ncells, threads, [&](int c) {
    const int cx = c % nx;
    const int cy = c / nx;
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd M2(3, m);
    Eigen::MatrixXd M3(4, m);
    for (const auto& qp : quadrature[static_cast<std::size_t>(c)]) {
      const BasisTable b = space.eval_basis_in_cell(qp.x, cx, cy, 3);
      for (int k = 0; k < m; ++k) {
        M2(0, k) = b(2, 0, k);
        M2(1, k) = r2 * b(1, 1, k);
        M2(2, k) = b(0, 2, k);
        M3(0, k) = b(3, 0, k);
        M3(1, k) = r3 * b(2, 1, k);
        M3(2, k) = r3 * b(1, 2, k);
        M3(3, k) = b(0, 3, k);
      }
      const BendingOperators& ops = field.phase(qp.in_inclusion);
      Ke.noalias() += qp.w * (M2.transpose() * (ops.G() * M2) + M3.transpose() * (ops.Q() * M3));
      if (dofs[static_cast<std::size_t>(c)].empty()) dofs[static_cast<std::size_t>(c)] = b.dofs;
    }
    element[static_cast<std::size_t>(c)] = 0.5 * (Ke + Ke.transpose());
  });

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(ncells) * m * m);
  for (int c = 0; c < ncells; ++c) {
    const auto& Ke = element[static_cast<std::size_t>(c)];
    const auto& d = dofs[static_cast<std::size_t>(c)];
    for (int j = 0; j < static_cast<int>(d.size()); ++j) {
      for (int i = 0; i < static_cast<int>(d.size()); ++i) triplets.emplace_back(d[i], d[j], Ke(i, j));
    }
  }
  SparseMatrix K(space.size(), space.size());
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

Eigen::VectorXd assemble_load(const SplineSpace& space, const LoadSpec& loads, int points_per_segment) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(space.size());
  const BoundaryChart chart(space.domain());
  const GaussRule& g = gauss_legendre(points_per_segment);
  for (Edge e : {Edge::Bottom, Edge::Right, Edge::Top, Edge::Left}) {
    const int segments = (e == Edge::Bottom || e == Edge::Top) ? space.cells_x() : space.cells_y();
    const double start = chart.edge_start(e);
    const double piece = chart.edge_length(e) / segments;
    for (int k = 0; k < segments; ++k) {
      for_each_gauss_point(g, start + k * piece, start + (k + 1) * piece, [&](double s, double w) {
        const BoundaryPoint bp = chart.at(e, s);
        const EdgeLoad load = loads.at(bp, s);
        const TraceTable tr = space.boundary_trace(chart, e, s);
        for (std::size_t i = 0; i < tr.dofs.size(); ++i) {
          const auto k2 = static_cast<Eigen::Index>(i);
          f[tr.dofs[i]] -= w * (load.V * tr.value[k2] + load.Mn * tr.normal[k2] + load.Mhn * tr.normal2[k2]);
        }
      });
    }
  }
  return f;
}

Eigen::VectorXd assemble_volume_load(const SplineSpace& space, const std::function<double(const Vec2&)>& f,
                                     int points) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.size());
  const GaussRule& g = gauss_legendre(points);
  for (int cy = 0; cy < space.cells_y(); ++cy) {
    for (int cx = 0; cx < space.cells_x(); ++cx) {
      const Vec2 lo = cell_lo(space, cx, cy);
      const Vec2 hi = cell_hi(space, cx, cy);
      for_each_gauss_point(g, lo.y(), hi.y(), [&](double y, double wy) {
        for_each_gauss_point(g, lo.x(), hi.x(), [&](double x, double wx) {
          const Vec2 p(x, y);
          const double v = wx * wy * f(p);
          const BasisTable b = space.eval_basis_in_cell(p, cx, cy, 0);
          for (int k = 0; k < b.size(); ++k) out[b.dofs[k]] += v * b(0, 0, k);
        });
      });
    }
  }
  return out;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> constraint_matrix(const SplineSpace& space) {
  Eigen::Matrix<double, 3, Eigen::Dynamic> C = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, space.size());
  const GaussRule& g = gauss_legendre(space.degree() + 1);
  for (int cy = 0; cy < space.cells_y(); ++cy) {
    for (int cx = 0; cx < space.cells_x(); ++cx) {
      const Vec2 lo = cell_lo(space, cx, cy);
      const Vec2 hi = cell_hi(space, cx, cy);
      for_each_gauss_point(g, lo.y(), hi.y(), [&](double y, double wy) {
        for_each_gauss_point(g, lo.x(), hi.x(), [&](double x, double wx) {
          const BasisTable b = space.eval_basis_in_cell(Vec2(x, y), cx, cy, 1);
          const double w = wx * wy;
          for (int k = 0; k < b.size(); ++k) {
            C(0, b.dofs[k]) += w * b(0, 0, k);
            C(1, b.dofs[k]) += w * b(1, 0, k);
            C(2, b.dofs[k]) += w * b(0, 1, k);
          }
        });
      });
    }
  }
  return C;
}

Solution::Solution(std::shared_ptr<const SplineSpace> space, Eigen::VectorXd coefficients, SolveDiagnostics diagnostics)
    : space_(std::move(space)), coefficients_(std::move(coefficients)), diagnostics_(std::move(diagnostics)) {}

Derivatives Solution::eval(const Vec2& x, int order) const { return space_->evaluate(coefficients_, x, order); }

PlateProblem::PlateProblem(std::shared_ptr<const SplineSpace> space, CoefficientField field, LoadSpec loads,
                           SolverOptions options)
    : space_(std::move(space)), field_(std::move(field)), loads_(std::move(loads)), options_(options) {
  require(space_ != nullptr, "plate problem needs a spline space");
  field_.set().validate(space_->domain());
  if (options_.check_compatibility) {
    compat_ = check_compatibility(loads_, space_->domain(), {}, options_.compat_tolerance);
  } else {
    compat_ = compatibility_residuals(loads_, space_->domain(), {}, options_.compat_tolerance);
  }
  quadrature_ = build_cell_quadrature(*space_, field_.set(), options_);
  K_ = assemble_stiffness(*space_, field_, quadrature_, options_.threads);
  const int bpts = options_.boundary_points > 0 ? options_.boundary_points : space_->degree() + 4;
  f_ = assemble_load(*space_, loads_, bpts);
  if (loads_.has_volume()) {
    f_ += assemble_volume_load(
        *space_, [this](const Vec2& x) { return loads_.volume_at(x); }, resolved_points(*space_, options_) + 4);
  }
  C_ = constraint_matrix(*space_);
}

double PlateProblem::energy(const Eigen::VectorXd& q) const { return q.dot(K_ * q); }

double PlateProblem::work(const Eigen::VectorXd& q) const { return f_.dot(q); }

Eigen::Vector3d PlateProblem::normalization(const Eigen::VectorXd& q) const { return C_ * q; }

double PlateProblem::inclusion_integral(const ScalarField& u, double t) const {
  double s = 0.0;
  for (const auto& cell : quadrature_) {
    for (const auto& qp : cell) {
      if (!qp.in_inclusion) continue;
      const Derivatives d = u.eval(qp.x, 3);
      s += qp.w * (d.tensor_norm2(2) + t * t * d.tensor_norm2(3));
    }
  }
  return s;
}

namespace {

struct SolveResult {
  Eigen::VectorXd q;
  Eigen::Vector3d mu;
  int iterations = 0;
};

SolveResult solve_direct(const SparseMatrix& K, const Eigen::Matrix<double, 3, Eigen::Dynamic>& C,
                         const Eigen::VectorXd& f) {
  const Eigen::Index n = K.rows();
  const double kmax = K.nonZeros() > 0 ? K.coeffs().cwiseAbs().maxCoeff() : 1.0;
  const double cmax = C.cwiseAbs().maxCoeff();
  const double scale = (kmax > 0.0 && cmax > 0.0) ? kmax / cmax : 1.0;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(K.nonZeros() + 6 * n));
  for (int k = 0; k < K.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int r = 0; r < 3; ++r) {
      if (C(r, j) == 0.0) continue;
      t.emplace_back(n + r, j, scale * C(r, j));
      t.emplace_back(j, n + r, scale * C(r, j));
    }
  }
  SparseMatrix A(n + 3, n + 3);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) fail(ErrorKind::SolverFailure, "saddle-point factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 3);
  b.head(n) = f;
  Eigen::VectorXd x = lu.solve(b);
  const Eigen::VectorXd r = b - A * x;
  x += lu.solve(r);
  SolveResult out;
  out.q = x.head(n);
  out.mu = scale * x.tail<3>();
  out.iterations = 1;
  return out;
}

SolveResult solve_projected_cg(const SparseMatrix& K, const Eigen::Matrix<double, 3, Eigen::Dynamic>& C,
                               const Eigen::VectorXd& f, double tol, int max_iter) {
  const Eigen::Index n = K.rows();
  Eigen::VectorXd dinv = K.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) dinv[i] = dinv[i] > 0.0 ? 1.0 / dinv[i] : 1.0;
  // M-orthogonal projection onto ker C with M = diag(K).
  const Eigen::Matrix<double, 3, Eigen::Dynamic> CM = C * dinv.asDiagonal();
  const Eigen::Matrix3d S = CM * C.transpose();
  const Eigen::LDLT<Eigen::Matrix3d> Sfac(S);
  const auto precondition = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    const Eigen::VectorXd z = dinv.cwiseProduct(r);
    return z - CM.transpose() * Sfac.solve(C * z);
  };
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = f;
  Eigen::VectorXd z = precondition(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double rz0 = rz;
  int it = 0;
  while (it < max_iter && rz > tol * tol * rz0 && rz0 > 0.0) {
    const Eigen::VectorXd Kp = K * p;
    const double alpha = rz / p.dot(Kp);
    if (!std::isfinite(alpha) || alpha <= 0.0) fail(ErrorKind::SolverFailure, "projected CG breakdown: operator not positive on the constraint complement");
    q += alpha * p;
    r -= alpha * Kp;
    z = precondition(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
    ++it;
  }
  if (rz0 > 0.0 && rz > tol * tol * rz0) {
    std::ostringstream os;
    os << "projected CG did not converge in " << max_iter << " iterations (relative residual "
       << std::sqrt(rz / rz0) << ")";
    fail(ErrorKind::SolverFailure, os.str());
  }
  // Remove constraint drift, then recover multipliers from the normal equations.
  const Eigen::Matrix3d CCt = C * C.transpose();
  q -= C.transpose() * CCt.ldlt().solve(C * q);
  SolveResult out;
  out.q = q;
  out.mu = CCt.ldlt().solve(C * (f - K * q));
  out.iterations = it;
  return out;
}

}  // namespace

Solution PlateProblem::solve() const {
  SolveResult r;
  SolveDiagnostics d;
  if (options_.method == SolveMethod::Direct) {
    d.method = "direct";
    r = solve_direct(K_, C_, f_);
  } else {
    d.method = "projected_cg";
    const int max_iter = options_.cg_max_iterations > 0 ? options_.cg_max_iterations : 20 * static_cast<int>(K_.rows());
    r = solve_projected_cg(K_, C_, f_, options_.cg_tolerance, max_iter);
  }
  d.iterations = r.iterations;
  d.multipliers = r.mu;
  const double fnorm = f_.norm();
  const Eigen::VectorXd res = K_ * r.q + C_.transpose() * r.mu - f_;
  d.residual = fnorm > 0.0 ? res.norm() / fnorm : res.norm();
  const double qn = r.q.norm();
  d.constraint_residual = qn > 0.0 ? (C_ * r.q).norm() / (C_.norm() * qn) : 0.0;
  if (!r.q.allFinite() || !(d.residual <= 1e-6)) {
    std::ostringstream os;
    os << "solver breakdown: relative residual " << d.residual << " (" << d.method << ")";
    fail(ErrorKind::SolverFailure, os.str());
  }
  return Solution(space_, std::move(r.q), d);
}

}  // namespace nanoplate

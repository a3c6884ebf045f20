#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "nanoplate/error.hpp"
#include "nanoplate/quadrature.hpp"
#include "nanoplate/solver.hpp"
#include "oracles.hpp"

using namespace nanoplate;

namespace {

BendingOperators reference_ops() {
  return build_bending_operators({1.0, 1.0}, {0.05, 0.02, 0.02, 0.02, 1.0});
}

std::shared_ptr<const SplineSpace> unit_space(int n, int p = 3) {
  return std::make_shared<const SplineSpace>(RectDomain{}, p, n, n);
}

double max_abs(const SparseMatrix& K) {
  double m = 0.0;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace

TEST_CASE("stiffness matches a dense brute-force assembly on 2x2 cells") {
  const auto ops = build_bending_operators({1.3, 0.4}, {0.2, 0.1, 0.15, 0.12, 1.0});
  const auto& c = ops.coefficients();
  const RectDomain dom{{0.0, 0.0}, 1.0, 0.8};
  const SplineSpace space(dom, 3, 2, 2);
  SolverOptions opts;
  const auto quad = build_cell_quadrature(space, InclusionSet{}, opts);
  const Eigen::MatrixXd K = Eigen::MatrixXd(assemble_stiffness(space, CoefficientField::homogeneous(ops), quad));

  const oracle::CoxDeBoor bx(3, 2, 0.0, 1.0), by(3, 2, 0.0, 0.8);
  const int nx = bx.size(), n = nx * by.size();
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(n, n);
  const auto& g = gauss_legendre(8);
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy)
      for_each_gauss_point(g, cy * 0.4, (cy + 1) * 0.4, [&](double y, double wy) {
        for_each_gauss_point(g, cx * 0.5, (cx + 1) * 0.5, [&](double x, double wx) {
          std::vector<oracle::Full2> H(static_cast<std::size_t>(n));
          std::vector<oracle::Full3> T(static_cast<std::size_t>(n));
          for (int j = 0; j < by.size(); ++j)
            for (int i = 0; i < nx; ++i) {
              const auto k = static_cast<std::size_t>(j * nx + i);
              for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                  const int rx = (a == 0) + (b == 0);
                  H[k][a][b] = bx.deriv(i, 3, rx, x) * by.deriv(j, 3, 2 - rx, y);
                  for (int e = 0; e < 2; ++e) {
                    const int sx = rx + (e == 0);
                    T[k][a][b][e] = bx.deriv(i, 3, sx, x) * by.deriv(j, 3, 3 - sx, y);
                  }
                }
            }
          for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s) {
              const auto rr = static_cast<std::size_t>(r), ss = static_cast<std::size_t>(s);
              ref(r, s) += wx * wy * (oracle::form2(c, H[rr], H[ss]) + oracle::form3(c, T[rr], T[ss]));
            }
        });
      });
  CHECK((K - ref).norm() <= 1e-12 * ref.norm());
  CHECK((K - K.transpose()).norm() <= 1e-13 * K.norm());
}

TEST_CASE("stiffness kernel is exactly the affine functions") {
  const auto space = unit_space(10);
  const auto ops = reference_ops();
  const auto quad = build_cell_quadrature(*space, InclusionSet{}, SolverOptions{});
  const SparseMatrix K = assemble_stiffness(*space, CoefficientField::homogeneous(ops), quad);
  const Eigen::MatrixXd Kd(K);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Kd, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double norm = ev.cwiseAbs().maxCoeff();
  CHECK(std::abs(ev(0)) <= 1e-10 * norm);
  CHECK(std::abs(ev(1)) <= 1e-10 * norm);
  CHECK(std::abs(ev(2)) <= 1e-10 * norm);
  CHECK(ev(3) > 1e-10 * norm);

  for (const auto& f : std::vector<std::function<double(const Vec2&)>>{
           [](const Vec2&) { return 1.0; }, [](const Vec2& x) { return x.x(); }, [](const Vec2& x) { return x.y(); }}) {
    const Eigen::VectorXd q = space->interpolate(f);
    CHECK((K * q).cwiseAbs().maxCoeff() <= 1e-12 * max_abs(K) * q.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("threaded assembly is identical to serial assembly") {
  const auto space = unit_space(16);
  const auto ops = reference_ops();
  const InclusionSet set({Disk{{0.5, 0.5}, 0.12}});
  const CoefficientField field(ops, ops.scaled(2.0), set);
  const auto quad = build_cell_quadrature(*space, set, SolverOptions{});
  const SparseMatrix a = assemble_stiffness(*space, field, quad, 1);
  const SparseMatrix b = assemble_stiffness(*space, field, quad, 4);
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("cut-cell quadrature resolves the inclusion area") {
  const auto space = unit_space(32);
  const InclusionSet set({Disk{{0.5, 0.5}, 0.12}});
  SolverOptions opts;
  const auto quad = build_cell_quadrature(*space, set, opts);
  double inside = 0.0, total = 0.0;
  for (const auto& cell : quad)
    for (const auto& q : cell) {
      total += q.w;
      if (q.in_inclusion) inside += q.w;
    }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inside - area(set)) <= 5e-3 * area(set));
}

TEST_CASE("pure moment load reproduces the exact paraboloid") {
  const auto ops = reference_ops();
  const double c12 = ops.apply_P(Sym2{1.0, 0.0, 1.0}).a11;
  const double kappa = 1.0, m = -kappa * c12;
  for (int n : {4, 8}) {
    const auto space = unit_space(n);
    const PlateProblem problem(space, CoefficientField::homogeneous(ops), pure_moment_load(m));
    const Solution u = problem.solve();
    double worst = 0.0;
    for (double x : {0.1, 0.37, 0.5, 0.93})
      for (double y : {0.05, 0.42, 0.77}) {
        const double exact = kappa * (((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)) / 2 - 2.0 / 24);
        const Derivatives d = u.eval({x, y}, 3);
        worst = std::max({worst, std::abs(d.value() - exact), std::abs(d.d[2][0] - kappa), std::abs(d.d[1][1]),
                          std::abs(d.d[3][0])});
      }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("Galerkin identity, normalization and solver agreement") {
  const auto space = unit_space(16);
  const auto ops = reference_ops();
  const RectDomain dom;
  const InclusionSet set({Disk{{0.5, 0.5}, 0.12}});
  const auto loads = self_equilibrated_load(dom, 1, 1.0, 1.0, 0.0);
  const PlateProblem problem(space, CoefficientField(ops, ops.scaled(2.0), set), loads);
  const Solution u = problem.solve();
  const double L = problem.work(u.coefficients());
  CHECK(std::abs(L - problem.energy(u.coefficients())) <= 1e-8 * std::abs(L));
  CHECK(u.diagnostics().constraint_residual <= 1e-10);
  const Eigen::Vector3d nrm = problem.normalization(u.coefficients());
  CHECK(nrm.cwiseAbs().maxCoeff() <= 1e-10 * u.coefficients().cwiseAbs().maxCoeff());

  SolverOptions cg;
  cg.method = SolveMethod::ProjectedCG;
  const PlateProblem problem_cg(space, CoefficientField(ops, ops.scaled(2.0), set), loads, cg);
  const Solution v = problem_cg.solve();
  CHECK((v.coefficients() - u.coefficients()).norm() <= 1e-6 * u.coefficients().norm());
  CHECK(std::abs(problem_cg.work(v.coefficients()) - L) <= 1e-8 * std::abs(L));

  // affine shifts leave the energy unchanged
  const Eigen::VectorXd shift = space->interpolate([](const Vec2& x) { return 3.0 - 2.0 * x.x() + 0.5 * x.y(); });
  const double e0 = problem.energy(u.coefficients());
  CHECK(problem.energy(u.coefficients() + shift) == doctest::Approx(e0).epsilon(1e-10));
}

TEST_CASE("trivial solves") {
  const auto space = unit_space(8);
  const auto ops = reference_ops();
  const PlateProblem zero(space, CoefficientField::homogeneous(ops), zero_load());
  const Solution z = zero.solve();
  CHECK(z.coefficients().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(zero.energy(z.coefficients()) == 0.0);
  CHECK(zero.load().cwiseAbs().maxCoeff() == 0.0);

  // Empty inclusion set with identical materials reproduces the background solve.
  const auto loads = self_equilibrated_load(RectDomain{}, 2, 1.0, 0.5, 0.1);
  const Solution a = PlateProblem(space, CoefficientField::homogeneous(ops), loads).solve();
  const Solution b = PlateProblem(space, CoefficientField(ops, ops, InclusionSet{}), loads).solve();
  CHECK((a.coefficients() - b.coefficients()).norm() <= 1e-12 * a.coefficients().norm());

  // Load vector is orthogonal to the affine kernel for compatible data.
  const PlateProblem p(space, CoefficientField::homogeneous(ops), loads);
  const Eigen::VectorXd one = space->interpolate([](const Vec2&) { return 1.0; });
  const Eigen::VectorXd x1 = space->interpolate([](const Vec2& x) { return x.x(); });
  CHECK(std::abs(p.load().dot(one)) <= 1e-12 * p.load().norm());
  CHECK(std::abs(p.load().dot(x1)) <= 1e-12 * p.load().norm());
}

TEST_CASE("incompatible loads are rejected before solving") {
  const auto space = unit_space(8);
  const LoadSpec shear("constant_shear", [](const BoundaryPoint&, double) { return EdgeLoad{1.0, 0.0, 0.0}; });
  try {
    const PlateProblem p(space, CoefficientField::homogeneous(reference_ops()), shear);
    FAIL("expected an incompatible-loads error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IncompatibleLoads);
    CHECK(std::string(e.what()).find("force") != std::string::npos);
  }
}

TEST_CASE("subcell refinement changes the work by less than half a percent") {
  const auto space = unit_space(32);
  const auto ops = reference_ops();
  const InclusionSet set({Disk{{0.5, 0.5}, 0.12}});
  const auto loads = self_equilibrated_load(RectDomain{}, 1, 1.0, 1.0, 0.0);
  SolverOptions o4, o5;
  o5.subcell_depth = 5;
  const PlateProblem p4(space, CoefficientField(ops, ops.scaled(2.0), set), loads, o4);
  const PlateProblem p5(space, CoefficientField(ops, ops.scaled(2.0), set), loads, o5);
  const double w4 = p4.work(p4.solve().coefficients());
  const double w5 = p5.work(p5.solve().coefficients());
  CHECK(std::abs(w4 - w5) <= 5e-3 * std::abs(w4));
}

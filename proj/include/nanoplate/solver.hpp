#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "nanoplate/field.hpp"
#include "nanoplate/geometry.hpp"
#include "nanoplate/loads.hpp"
#include "nanoplate/materials.hpp"
#include "nanoplate/spline_space.hpp"

namespace nanoplate {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Piecewise-constant operators: inclusion operators on D, background elsewhere.
class CoefficientField {
 public:
  CoefficientField(BendingOperators background, BendingOperators inclusion, InclusionSet set);
  static CoefficientField homogeneous(const BendingOperators& background);

  [[nodiscard]] const BendingOperators& background() const { return background_; }
  [[nodiscard]] const BendingOperators& inclusion() const { return inclusion_; }
  [[nodiscard]] const InclusionSet& set() const { return set_; }
  [[nodiscard]] const BendingOperators& at(const Vec2& x) const {
    return set_.contains(x) ? inclusion_ : background_;
  }
  [[nodiscard]] const BendingOperators& phase(bool in_inclusion) const {
    return in_inclusion ? inclusion_ : background_;
  }

 private:
  BendingOperators background_;
  BendingOperators inclusion_;
  InclusionSet set_;
};

struct QuadraturePoint {
  Vec2 x;
  double w = 0.0;
  bool in_inclusion = false;
};

/// Tensor Gauss points on the box [lo, hi]. Boxes straddling the inclusion boundary are bisected
/// up to `depth` levels; at the finest level each point is classified individually.
void cut_cell_quadrature(const Vec2& lo, const Vec2& hi, const InclusionSet& set, int points, int depth,
                         std::vector<QuadraturePoint>& out);

enum class SolveMethod { Direct, ProjectedCG };

struct SolverOptions {
  int subcell_depth = 4;
  int quadrature_points = 0;  // per axis and cell; 0 means degree + 2
  int boundary_points = 0;    // per boundary cell segment; 0 means degree + 4
  int threads = 1;
  SolveMethod method = SolveMethod::Direct;
  double cg_tolerance = 1e-13;
  int cg_max_iterations = 0;  // 0 means 20 x dofs
  double compat_tolerance = 1e-10;
  bool check_compatibility = true;
};

struct SolveDiagnostics {
  std::string method;
  double residual = 0.0;             // |K q + C^T mu - f| / |f|
  double constraint_residual = 0.0;  // |C q| / (|C| |q|)
  int iterations = 0;
  Eigen::Vector3d multipliers = Eigen::Vector3d::Zero();
};

class Solution final : public ScalarField {
 public:
  Solution(std::shared_ptr<const SplineSpace> space, Eigen::VectorXd coefficients, SolveDiagnostics diagnostics);

  [[nodiscard]] Derivatives eval(const Vec2& x, int order) const override;
  [[nodiscard]] int max_order() const override { return space_->degree(); }

  [[nodiscard]] const SplineSpace& space() const { return *space_; }
  [[nodiscard]] const Eigen::VectorXd& coefficients() const { return coefficients_; }
  [[nodiscard]] const SolveDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  std::shared_ptr<const SplineSpace> space_;
  Eigen::VectorXd coefficients_;
  SolveDiagnostics diagnostics_;
};

/// Quadrature points of every cell (row-major over cells).
using CellQuadrature = std::vector<std::vector<QuadraturePoint>>;

CellQuadrature build_cell_quadrature(const SplineSpace& space, const InclusionSet& set, const SolverOptions& options);

/// Stiffness of a(u, w) = int (P + Ph) D2u . D2w + Q D3u . D3w. Element matrices may be computed on
/// several threads; they are always merged in cell order.
SparseMatrix assemble_stiffness(const SplineSpace& space, const CoefficientField& field,
                                const CellQuadrature& quadrature, int threads = 1);

/// L(basis_i) = -int_boundary (V w + Mn w_n + Mhn w_nn).
Eigen::VectorXd assemble_load(const SplineSpace& space, const LoadSpec& loads, int points_per_segment);

/// int f basis_i.
Eigen::VectorXd assemble_volume_load(const SplineSpace& space, const std::function<double(const Vec2&)>& f,
                                     int points);

/// Rows: int w, int w_1, int w_2 for each basis function.
Eigen::Matrix<double, 3, Eigen::Dynamic> constraint_matrix(const SplineSpace& space);

/// Discrete Neumann problem with the three normalization constraints.
class PlateProblem {
 public:
  PlateProblem(std::shared_ptr<const SplineSpace> space, CoefficientField field, LoadSpec loads,
               SolverOptions options = {});

  [[nodiscard]] const SplineSpace& space() const { return *space_; }
  [[nodiscard]] std::shared_ptr<const SplineSpace> space_ptr() const { return space_; }
  [[nodiscard]] const CoefficientField& field() const { return field_; }
  [[nodiscard]] const LoadSpec& loads() const { return loads_; }
  [[nodiscard]] const SolverOptions& options() const { return options_; }
  [[nodiscard]] const SparseMatrix& stiffness() const { return K_; }
  [[nodiscard]] const Eigen::VectorXd& load() const { return f_; }
  [[nodiscard]] const Eigen::Matrix<double, 3, Eigen::Dynamic>& constraints() const { return C_; }
  [[nodiscard]] const CellQuadrature& quadrature() const { return quadrature_; }
  [[nodiscard]] const CompatibilityResiduals& compatibility() const { return compat_; }

  [[nodiscard]] Solution solve() const;

  /// a(u, u) with the assembly quadrature.
  [[nodiscard]] double energy(const Eigen::VectorXd& q) const;
  /// L(u).
  [[nodiscard]] double work(const Eigen::VectorXd& q) const;
  /// (int u, int u_1, int u_2).
  [[nodiscard]] Eigen::Vector3d normalization(const Eigen::VectorXd& q) const;
  /// int_D |D2 u|^2 + t^2 |D3 u|^2 over the inclusion points of this problem's quadrature.
  [[nodiscard]] double inclusion_integral(const ScalarField& u, double t) const;

 private:
  std::shared_ptr<const SplineSpace> space_;
  CoefficientField field_;
  LoadSpec loads_;
  SolverOptions options_;
  CompatibilityResiduals compat_;
  CellQuadrature quadrature_;
  SparseMatrix K_;
  Eigen::VectorXd f_;
  Eigen::Matrix<double, 3, Eigen::Dynamic> C_;
};

}  // namespace nanoplate

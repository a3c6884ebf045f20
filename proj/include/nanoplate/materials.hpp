#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace nanoplate {

/// Lamé pair of an isotropic plate material.
struct IsotropicModuli {
  double mu = 1.0;
  double lambda = 0.0;

  [[nodiscard]] double young() const { return mu * (2.0 * mu + 3.0 * lambda) / (mu + lambda); }
  [[nodiscard]] double poisson() const { return lambda / (2.0 * (mu + lambda)); }
};

/// Thickness, material length scales and the reference length r0.
struct LengthScales {
  double t = 0.05;
  double l0 = 0.02;
  double l1 = 0.02;
  double l2 = 0.02;
  double r0 = 1.0;

  [[nodiscard]] double l_min() const;
};

/// Lower bounds used to reject degenerate moduli: mu >= alpha0, 2mu + 3lambda >= gamma0.
struct EllipticityBounds {
  double alpha0 = 1e-8;
  double gamma0 = 1e-8;
};

/// Symmetric 2x2 tensor, components (11, 12, 22). The 12 entry counts twice in inner products.
struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  static constexpr double kWeights[3] = {1.0, 2.0, 1.0};

  [[nodiscard]] double dot(const Sym2& o) const { return a11 * o.a11 + 2.0 * a12 * o.a12 + a22 * o.a22; }
  [[nodiscard]] double norm2() const { return dot(*this); }
  [[nodiscard]] double trace() const { return a11 + a22; }

  /// Orthonormal coordinates (11, sqrt2*12, 22): Euclidean norm equals |A|.
  [[nodiscard]] Eigen::Vector3d mandel() const;
  static Sym2 from_mandel(const Eigen::Vector3d& v);
};

/// Fully symmetric third-order 2D tensor, components (111, 112, 122, 222) with multiplicities (1, 3, 3, 1).
struct Sym3 {
  double b111 = 0.0;
  double b112 = 0.0;
  double b122 = 0.0;
  double b222 = 0.0;

  static constexpr double kWeights[4] = {1.0, 3.0, 3.0, 1.0};

  [[nodiscard]] double dot(const Sym3& o) const {
    return b111 * o.b111 + 3.0 * b112 * o.b112 + 3.0 * b122 * o.b122 + b222 * o.b222;
  }
  [[nodiscard]] double norm2() const { return dot(*this); }

  [[nodiscard]] Eigen::Vector4d mandel() const;
  static Sym3 from_mandel(const Eigen::Vector4d& v);
};

/// Scalar coefficients of the isotropic bending operators.
struct BendingCoefficients {
  double B = 0.0;   // bending stiffness
  double nu = 0.0;  // Poisson ratio
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double q8 = 0.0;
  double q9 = 0.0;
};

/// P, P^h on Sym2 and Q on Sym3, stored as symmetric matrices in orthonormal (Mandel) coordinates,
/// so eigenvalues are Rayleigh quotients with respect to the full-index norms.
class BendingOperators {
 public:
  BendingOperators() = default;
  BendingOperators(const BendingCoefficients& coefficients, double thickness, double length_scale);

  [[nodiscard]] const BendingCoefficients& coefficients() const { return coeffs_; }
  [[nodiscard]] double thickness() const { return t_; }
  /// l = min(l0, l1, l2) of the generating material.
  [[nodiscard]] double length_scale() const { return l_; }

  [[nodiscard]] const Eigen::Matrix3d& P() const { return p_; }
  [[nodiscard]] const Eigen::Matrix3d& Ph() const { return ph_; }
  [[nodiscard]] const Eigen::Matrix4d& Q() const { return q_; }
  /// P + P^h.
  [[nodiscard]] const Eigen::Matrix3d& G() const { return g_; }

  /// (P + P^h) A.
  [[nodiscard]] Sym2 apply_P(const Sym2& a) const;
  /// Q B.
  [[nodiscard]] Sym3 apply_Q(const Sym3& b) const;

  [[nodiscard]] double min_eig_G() const { return eig_g_(0); }
  [[nodiscard]] double max_eig_G() const { return eig_g_(2); }
  [[nodiscard]] double min_eig_Q() const { return eig_q_(0); }
  [[nodiscard]] double max_eig_Q() const { return eig_q_(3); }

  /// min eig(P + P^h) / (t (t^2 + l^2)).
  [[nodiscard]] double xi_P() const;
  /// min eig(Q) / (t^3 l^2).
  [[nodiscard]] double xi_Q() const;

  /// Returns a copy with every matrix multiplied by c (scalar contrast).
  [[nodiscard]] BendingOperators scaled(double c) const;

 private:
  BendingCoefficients coeffs_;
  double t_ = 0.0;
  double l_ = 0.0;
  Eigen::Matrix3d p_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d ph_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d g_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix4d q_ = Eigen::Matrix4d::Zero();
  Eigen::Vector3d eig_g_ = Eigen::Vector3d::Zero();
  Eigen::Vector4d eig_q_ = Eigen::Vector4d::Zero();
};

/// Optional individual Q8/Q9 values; must satisfy 2(Q8 + 2Q9) = 5 b1.
struct QSplit {
  double q8 = 0.0;
  double q9 = 0.0;
};

BendingOperators build_bending_operators(const IsotropicModuli& moduli, const LengthScales& scales,
                                         std::optional<QSplit> q_split = std::nullopt,
                                         const EllipticityBounds& bounds = {});

/// Component Q_ijklmn of the isotropic sixth-order tensor (indices in {0, 1}).
double q_tensor_component(const BendingCoefficients& c, int i, int j, int k, int l, int m, int n);

/// Constant-coefficient strong form: a(u, w) = int (c4 Lap^2 u - c6 Lap^3 u) w for compactly supported w.
struct StrongFormConstants {
  double c4 = 0.0;
  double c6 = 0.0;
};

StrongFormConstants strong_form_constants(const BendingOperators& ops);

enum class JumpKind { StifferEverywhere, SofterEverywhere, Indefinite, NoContrast };

std::string to_string(JumpKind kind);

/// Jump classification and Energy-lemma constants. For Indefinite the bracket constants are unset.
struct JumpClassification {
  JumpKind kind = JumpKind::Indefinite;
  std::optional<double> eta;
  std::optional<double> eta_bar;
  std::optional<double> delta;
  std::optional<double> delta_bar;
  std::optional<double> eta_star;     // min(eta, eta_bar)
  std::optional<double> delta_star;   // max(delta, delta_bar)
  std::optional<double> delta_lower;  // min(delta, delta_bar)
  // Generalized spectra of H_P relative to P + P^h and of H_Q relative to Q (ascending).
  Eigen::Vector3d spectrum_P = Eigen::Vector3d::Zero();
  Eigen::Vector4d spectrum_Q = Eigen::Vector4d::Zero();
  double xi0 = 0.0;
  double xi1 = 0.0;
  double xi0_bar = 0.0;
  double xi1_bar = 0.0;

  [[nodiscard]] double xi0_star() const { return std::min(xi0, xi0_bar); }
  [[nodiscard]] double xi1_star() const { return std::max(xi1, xi1_bar); }
};

JumpClassification classify_jump(const BendingOperators& background, const BendingOperators& inclusion);

}  // namespace nanoplate

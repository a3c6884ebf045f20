#include "nanoplate/materials.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nanoplate/error.hpp"

namespace nanoplate {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt3 = 1.73205080756887729353;

double kron(int a, int b) { return a == b ? 1.0 : 0.0; }

using Basis2 = std::array<std::array<double, 4>, 3>;  // [a][2*i+j]
using Basis3 = std::array<std::array<double, 8>, 4>;  // [a][4*i+2*j+k]

// Orthonormal bases of the symmetric tensor subspaces.
const Basis2& sym2_basis() {
  static const Basis2 basis = [] {
    Basis2 b{};
    b[0][0] = 1.0;
    b[1][1] = b[1][2] = 1.0 / kSqrt2;
    b[2][3] = 1.0;
    return b;
  }();
  return basis;
}

const Basis3& sym3_basis() {
  static const Basis3 basis = [] {
    Basis3 b{};
    b[0][0] = 1.0;
    for (int idx = 0; idx < 8; ++idx) {
      const int ones = (idx >> 2 & 1) + (idx >> 1 & 1) + (idx & 1);
      if (ones == 1) b[1][idx] = 1.0 / kSqrt3;
      if (ones == 2) b[2][idx] = 1.0 / kSqrt3;
    }
    b[3][7] = 1.0;
    return b;
  }();
  return basis;
}

template <class Tensor4>
Eigen::Matrix3d restrict_to_sym2(Tensor4&& component) {
  const auto& e = sym2_basis();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (int ij = 0; ij < 4; ++ij) {
        for (int kl = 0; kl < 4; ++kl) {
          const double w = e[a][ij] * e[b][kl];
          if (w != 0.0) s += w * component(ij >> 1, ij & 1, kl >> 1, kl & 1);
        }
      }
      m(a, b) = s;
    }
  }
  return m;
}

void validate_coefficients(const BendingCoefficients& c) {
  require(std::isfinite(c.B) && std::isfinite(c.nu) && std::isfinite(c.a0) && std::isfinite(c.a1) &&
              std::isfinite(c.a2) && std::isfinite(c.b0) && std::isfinite(c.b1) && std::isfinite(c.q8) &&
              std::isfinite(c.q9),
          "bending coefficients must be finite");
}

}  // namespace

double LengthScales::l_min() const { return std::min({l0, l1, l2}); }

Eigen::Vector3d Sym2::mandel() const { return {a11, kSqrt2 * a12, a22}; }

Sym2 Sym2::from_mandel(const Eigen::Vector3d& v) { return {v(0), v(1) / kSqrt2, v(2)}; }

Eigen::Vector4d Sym3::mandel() const { return {b111, kSqrt3 * b112, kSqrt3 * b122, b222}; }

Sym3 Sym3::from_mandel(const Eigen::Vector4d& v) { return {v(0), v(1) / kSqrt3, v(2) / kSqrt3, v(3)}; }

double q_tensor_component(const BendingCoefficients& c, int i, int j, int k, int l, int m, int n) {
  const double d = c.b0 - 3.0 * c.b1;
  double q = d / 3.0 * kron(i, j) * kron(k, n) * kron(l, m);
  q += d / 6.0 *
       (kron(i, k) * (kron(j, l) * kron(m, n) + kron(j, m) * kron(l, n)) +
        kron(j, k) * (kron(i, l) * kron(m, n) + kron(i, m) * kron(l, n)));
  q += c.q8 * kron(k, n) * (kron(i, l) * kron(j, m) + kron(i, m) * kron(j, l));
  q += c.q9 * (kron(j, n) * (kron(i, l) * kron(k, m) + kron(i, m) * kron(k, l)) +
               kron(i, n) * (kron(j, l) * kron(k, m) + kron(j, m) * kron(k, l)));
  return q;
}

BendingOperators::BendingOperators(const BendingCoefficients& coefficients, double thickness,
                                   double length_scale)
    : coeffs_(coefficients), t_(thickness), l_(length_scale) {
  validate_coefficients(coeffs_);
  const auto& c = coeffs_;
  p_ = restrict_to_sym2([&](int a, int b, int g, int d) {
    return c.B * ((1.0 - c.nu) * kron(a, g) * kron(b, d) + c.nu * kron(a, b) * kron(g, d));
  });
  ph_ = restrict_to_sym2([&](int a, int b, int g, int d) {
    return (2.0 * c.a2 + 5.0 * c.a1) * kron(a, g) * kron(b, d) + (c.a0 - c.a1 - c.a2) * kron(a, b) * kron(g, d);
  });
  g_ = p_ + ph_;

  const auto& f = sym3_basis();
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int ijk = 0; ijk < 8; ++ijk) {
        if (f[a][ijk] == 0.0) continue;
        for (int lmn = 0; lmn < 8; ++lmn) {
          if (f[b][lmn] == 0.0) continue;
          s += f[a][ijk] * f[b][lmn] *
               q_tensor_component(c, ijk >> 2 & 1, ijk >> 1 & 1, ijk & 1, lmn >> 2 & 1, lmn >> 1 & 1, lmn & 1);
        }
      }
      q_(a, b) = s;
    }
  }
  eig_g_ = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(g_, Eigen::EigenvaluesOnly).eigenvalues();
  eig_q_ = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(q_, Eigen::EigenvaluesOnly).eigenvalues();
}

Sym2 BendingOperators::apply_P(const Sym2& a) const { return Sym2::from_mandel(g_ * a.mandel()); }

Sym3 BendingOperators::apply_Q(const Sym3& b) const { return Sym3::from_mandel(q_ * b.mandel()); }

double BendingOperators::xi_P() const { return min_eig_G() / (t_ * (t_ * t_ + l_ * l_)); }

double BendingOperators::xi_Q() const { return min_eig_Q() / (t_ * t_ * t_ * l_ * l_); }

BendingOperators BendingOperators::scaled(double c) const {
  BendingOperators out = *this;
  auto& k = out.coeffs_;
  k.B *= c;
  k.a0 *= c;
  k.a1 *= c;
  k.a2 *= c;
  k.b0 *= c;
  k.b1 *= c;
  k.q8 *= c;
  k.q9 *= c;
  out.p_ *= c;
  out.ph_ *= c;
  out.g_ *= c;
  out.q_ *= c;
  out.eig_g_ *= c;
  out.eig_q_ *= c;
  if (c < 0.0) {
    out.eig_g_.reverseInPlace();
    out.eig_q_.reverseInPlace();
  }
  return out;
}

BendingOperators build_bending_operators(const IsotropicModuli& moduli, const LengthScales& scales,
                                         std::optional<QSplit> q_split, const EllipticityBounds& bounds) {
  require(std::isfinite(moduli.mu) && std::isfinite(moduli.lambda), "moduli must be finite");
  require(moduli.mu >= bounds.alpha0, "ellipticity violated: mu < alpha0");
  require(2.0 * moduli.mu + 3.0 * moduli.lambda >= bounds.gamma0, "ellipticity violated: 2mu + 3lambda < gamma0");
  require(scales.t > 0.0, "thickness t must be positive");
  require(scales.l0 > 0.0 && scales.l1 > 0.0 && scales.l2 > 0.0, "length scales l0, l1, l2 must be positive");
  require(scales.r0 > 0.0, "reference length r0 must be positive");

  const double mu = moduli.mu;
  const double t = scales.t;
  const double nu = moduli.poisson();
  const double young = moduli.young();
  require(std::isfinite(young) && std::isfinite(nu) && nu > -1.0 && nu < 0.5, "derived E, nu out of range");

  BendingCoefficients c;
  c.nu = nu;
  c.B = t * t * t * young / (12.0 * (1.0 - nu * nu));
  c.a0 = 2.0 * mu * t * scales.l0 * scales.l0;
  c.a1 = 2.0 / 15.0 * mu * t * scales.l1 * scales.l1;
  c.a2 = mu * t * scales.l2 * scales.l2;
  c.b0 = 2.0 * mu * (t * t * t / 12.0) * scales.l0 * scales.l0;
  c.b1 = 2.0 / 5.0 * mu * (t * t * t / 12.0) * scales.l1 * scales.l1;
  if (q_split) {
    const double lhs = 2.0 * (q_split->q8 + 2.0 * q_split->q9);
    const double rhs = 5.0 * c.b1;
    require(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs), "Q8/Q9 override violates 2(Q8 + 2Q9) = 5 b1");
    c.q8 = q_split->q8;
    c.q9 = q_split->q9;
  } else {
    c.q8 = 5.0 / 6.0 * c.b1;
    c.q9 = 5.0 / 6.0 * c.b1;
  }
  BendingOperators ops(c, t, scales.l_min());
  require(ops.min_eig_G() > 0.0 && ops.min_eig_Q() > 0.0, "bending operators are not strongly convex");
  return ops;
}

StrongFormConstants strong_form_constants(const BendingOperators& ops) {
  const auto& c = ops.coefficients();
  return {c.B + c.a0 + 4.0 * c.a1 + c.a2, c.b0 + 2.0 * c.b1};
}

std::string to_string(JumpKind kind) {
  switch (kind) {
    case JumpKind::StifferEverywhere:
      return "stiffer";
    case JumpKind::SofterEverywhere:
      return "softer";
    case JumpKind::Indefinite:
      return "indefinite";
    case JumpKind::NoContrast:
      return "no_contrast";
  }
  return "unknown";
}

JumpClassification classify_jump(const BendingOperators& background, const BendingOperators& inclusion) {
  JumpClassification out;
  const double t = background.thickness();
  out.xi0 = background.min_eig_G() / (t * t * t);
  out.xi1 = background.max_eig_G() / (t * t * t);
  out.xi0_bar = background.min_eig_Q() / std::pow(t, 5);
  out.xi1_bar = background.max_eig_Q() / std::pow(t, 5);

  const Eigen::Matrix3d hp = inclusion.G() - background.G();
  const Eigen::Matrix4d hq = inclusion.Q() - background.Q();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> gp(hp, background.G(), Eigen::EigenvaluesOnly);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix4d> gq(hq, background.Q(), Eigen::EigenvaluesOnly);
  if (gp.info() != Eigen::Success || gq.info() != Eigen::Success) {
    fail(ErrorKind::InvalidInput, "classify_jump: generalized eigensolve failed");
  }
  out.spectrum_P = gp.eigenvalues();
  out.spectrum_Q = gq.eigenvalues();

  constexpr double tol = 1e-12;
  const double p_min = out.spectrum_P.minCoeff();
  const double p_max = out.spectrum_P.maxCoeff();
  const double q_min = out.spectrum_Q.minCoeff();
  const double q_max = out.spectrum_Q.maxCoeff();

  const auto set_star = [&out] {
    out.eta_star = std::min(*out.eta, *out.eta_bar);
    out.delta_star = std::max(*out.delta, *out.delta_bar);
    out.delta_lower = std::min(*out.delta, *out.delta_bar);
  };

  if (std::max(std::abs(p_min), std::abs(p_max)) <= tol && std::max(std::abs(q_min), std::abs(q_max)) <= tol) {
    out.kind = JumpKind::NoContrast;
    out.eta = out.eta_bar = 0.0;
    out.delta = out.delta_bar = 1.0;
    set_star();
  } else if (p_min > tol && q_min > tol) {
    out.kind = JumpKind::StifferEverywhere;
    out.eta = p_min;
    out.delta = 1.0 + p_max;
    out.eta_bar = q_min;
    out.delta_bar = 1.0 + q_max;
    set_star();
  } else if (-p_max > tol && -q_max > tol && -p_min < 1.0 - tol && -q_min < 1.0 - tol) {
    out.kind = JumpKind::SofterEverywhere;
    out.eta = -p_max;
    out.delta = 1.0 + p_min;
    out.eta_bar = -q_max;
    out.delta_bar = 1.0 + q_min;
    set_star();
  } else {
    out.kind = JumpKind::Indefinite;
  }
  return out;
}

}  // namespace nanoplate

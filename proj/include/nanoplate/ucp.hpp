#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nanoplate/field.hpp"
#include "nanoplate/geometry.hpp"

namespace nanoplate {

enum class EnergyKind { Value, Hessian };

/// Composite polar Gauss rule on balls. Radial and angular segments scale with r / cell_size so
/// piecewise-polynomial integrands are resolved; per-segment node count comes from an exactness
/// pre-test on monomials of degree `exact_degree` over the unit disk.
struct BallQuadrature {
  double cell_size = 0.0;  // 0: a single segment per direction
  int exact_degree = 6;
  int extra_points = 2;
};

/// Smallest per-segment Gauss count integrating every monomial of total degree <= degree exactly
/// (1e-13 relative) over the unit disk with the composite layout used by ball quadrature.
int disk_points_for_degree(int degree);

/// Visits (x, weight) over B_r(x0).
void for_each_ball_point(const Vec2& x0, double r, const BallQuadrature& q,
                         const std::function<void(const Vec2&, double)>& f);

/// int_{B_r(x0)} u^2 (Value) or |D2u|^2 (Hessian). Throws DiagnosticsFailure if the ball leaves the domain.
double ball_energy(const ScalarField& u, const Vec2& x0, double r, EnergyKind kind, const RectDomain& domain,
                   const BallQuadrature& q = {});

/// int_Omega of a derivative functional on a cells x cells grid with `points` Gauss nodes per axis.
double domain_integral(const ScalarField& u, const RectDomain& domain, int cells, int points, int order,
                       const std::function<double(const Derivatives&)>& f);

/// Three-sphere exponents with kbar = 8.
double theta_hessian(double s, double r);
double theta_value(double s, double r);

struct ThreeSphere {
  EnergyKind kind = EnergyKind::Hessian;
  double s = 0.0;
  double r = 0.0;
  double outer = 0.0;
  double theta = 0.0;
  double Hs = 0.0;
  double Hr = 0.0;
  double Hout = 0.0;
  double C_emp = 0.0;     // H(s) / (H(outer)^(1-theta) H(r)^theta)
  double C_inside = 0.0;  // C_emp^(1/(1-theta)): the constant inside the power
  double consistency = 0.0;  // |C_emp H(outer)^(1-theta) H(r)^theta - H(s)| / H(s)
};

/// outer: the probe's reference radius R. The Hessian form compares with B_{R/2}, the value form with B_R.
/// Requires 2r <= s <= R / 2^cap (cap 11 for Hessian, 8 for value) unless enforce_ordering is false.
ThreeSphere three_sphere_check(const ScalarField& u, const Vec2& x0, double s, double r, double R, EnergyKind kind,
                               const RectDomain& domain, const BallQuadrature& q = {}, int cap = -1,
                               bool enforce_ordering = true);

struct LpsResult {
  double s = 0.0;
  double C_s = 0.0;
  Vec2 argmin = Vec2::Zero();
  int admissible = 0;
  double total = 0.0;
};

/// min over an n x n grid of admissible centers (clearance > chi s r0) of H(s r0) / int_Omega |D2u|^2.
LpsResult lps_constant(const ScalarField& u, const RectDomain& domain, double s, int grid, double chi,
                       double total_hessian_energy, const BallQuadrature& q = {});

/// Left side of the A_p inequality on B_r(x0) with |D2u|^2 floored at `floor`.
double ap_left_side(const ScalarField& u, const Vec2& x0, double r, double p, double floor, const RectDomain& domain,
                    const BallQuadrature& q = {});

struct CaccioppoliResult {
  double r = 0.0;
  std::vector<double> C;  // C[h-1] = r^h |D^h u|_{B_{r/2}} / |u|_{B_r}
};

CaccioppoliResult caccioppoli_constants(const ScalarField& u, const Vec2& x0, double r, int max_h,
                                        const RectDomain& domain, const BallQuadrature& q = {});

struct PoincareResult {
  double R = 0.0;
  double r = 0.0;
  double lhs = 0.0;  // int |u~|^2 + R^2 int |Du~|^2 over B_R
  double rhs = 0.0;  // (R^6 / r^2) int |D2u|^2 over B_R
  double quotient = 0.0;
};

/// u~ = u - (u)_r - (Du)_r . (x - x0), averages over B_r(x0). Refused when D2u vanishes on B_R.
PoincareResult poincare_quotient(const ScalarField& u, const Vec2& x0, double R, double r, const RectDomain& domain,
                                 const BallQuadrature& q = {});

/// |u|_{H^k} = r0^{-1} (sum_{i<=k} r0^{2i} int |D^i u|^2)^{1/2} over the domain.
double normalized_sobolev_norm(const ScalarField& u, const RectDomain& domain, int k, int cells, int points);

/// |u|_{H3} / (|u|_{H2}^{1/2} |u|_{H4}^{1/2}). Needs fourth derivatives.
double interpolation_quotient(const ScalarField& u, const RectDomain& domain, int cells, int points);

// Orchestration.

struct UcpConfig {
  std::vector<Vec2> probes;
  double outer_fraction = 0.9;  // R = outer_fraction x clearance
  int radius_levels = 12;       // r_k = R / 2^k, k = 0..levels
  std::vector<double> lps_s = {0.05, 0.1};
  int lps_grid = 9;
  double chi = 2.0;
  std::vector<double> ap_p = {2.0};
  double floor_factor = 1e-14;
  int hessian_cap = 11;
  int value_cap = 8;
  bool enforce_ordering = true;
  int caccioppoli_max_h = 3;
  int integration_cells = 64;
  int integration_points = 6;
  BallQuadrature quadrature;
  int threads = 1;
};

struct ProbeReport {
  Vec2 center = Vec2::Zero();
  double clearance = 0.0;
  double R = 0.0;
  std::vector<double> radii;  // ascending
  std::vector<double> H;
  std::vector<double> U;
  std::vector<double> doubling;  // H(2 r_k) / H(r_k) for 2 r_k <= R
  double K_emp = 0.0;
  double N = 0.0;      // U(R) / U(R / 2^7)
  double N_bar = 0.0;  // H(R) / H(R / 2^9)
  bool monotone = true;
  std::vector<ThreeSphere> three_sphere;
  std::vector<std::pair<double, double>> ap;  // (p, max over radii of the A_p left side)
  double ap_min = 0.0;                        // smallest A_p left side seen (>= 1 by Jensen)
  std::optional<CaccioppoliResult> caccioppoli;
  std::optional<PoincareResult> poincare;
  std::string error;
};

struct UcpReport {
  std::vector<ProbeReport> probes;
  std::vector<LpsResult> lps;
  std::vector<std::pair<double, double>> B_emp;  // (p, sup over probes)
  double total_hessian_energy = 0.0;
  double floor = 0.0;
  double floor_sensitivity = 0.0;  // max relative change of B_emp when the floor is halved
  std::optional<double> interpolation;
  std::vector<std::string> warnings;
};

UcpReport run_ucp(const ScalarField& u, const RectDomain& domain, const UcpConfig& config);

}  // namespace nanoplate

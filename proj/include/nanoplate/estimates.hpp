#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nanoplate/loads.hpp"
#include "nanoplate/materials.hpp"
#include "nanoplate/solver.hpp"

namespace nanoplate {

/// Boundary works, the Energy-lemma bracket and the size-estimator ratios of one scenario.
struct WorkReport {
  double W = 0.0;
  double W0 = 0.0;
  double gap = 0.0;          // W0 - W
  double residual_u = 0.0;   // |L(u) - a(u,u)| / |L(u)|
  double residual_u0 = 0.0;  // same for u0

  // Energy lemma.
  std::string regime = "none";  // stiffer, softer, no_contrast
  double inclusion_energy = 0.0;  // I_D
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  double slack = 0.1;
  bool bracket_ok = false;

  // Size estimators.
  double rho_lower = 0.0;
  double rho_lower_w0 = 0.0;
  double rho_upper_fat = 0.0;
  double rho_upper_general = 0.0;
  double p_used = 2.0;
  std::vector<std::pair<double, double>> general_curve;  // (p, rho)
  double F = 0.0;
};

/// W = L(u), W0 = L(u0), cross-checked against a(u, u). Throws SolverFailure when a residual exceeds 1e-6.
WorkReport compute_works(const PlateProblem& with_inclusion, const Solution& u, const PlateProblem& background,
                         const Solution& u0);

/// Signed gap in the orientation of the regime: W0 - W (stiffer), W - W0 (softer).
double oriented_gap(const WorkReport& report, const JumpClassification& jump);

/// Fills the bracket fields from I_D computed with the inclusion problem's quadrature.
/// Returns bracket_ok. Refuses Indefinite classifications.
bool energy_lemma_check(WorkReport& report, const PlateProblem& with_inclusion, const ScalarField& u0,
                        const JumpClassification& jump, double thickness, double slack = 0.1);

/// Fills the estimator ratios. Refuses Indefinite classifications and gaps of the wrong sign
/// (beyond sign_tolerance W0).
void size_estimators(WorkReport& report, double r0, const JumpClassification& jump, double p = 2.0,
                     const std::vector<double>& p_curve = {1.25, 1.5, 2.0, 3.0}, double sign_tolerance = 1e-8);

struct FRatio {
  double F = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

/// Spectral boundary norms on the closed loop: |g|_s^2 = P sum |c_m|^2 (1 + k_m^2 r0^2)^s.
double spectral_norm(const std::vector<double>& samples, double perimeter, double r0, double s);

/// Ratio of the higher- to lower-regularity combinations of the Neumann data. Requires uniform loop sampling.
FRatio f_ratio(const LoopSamples& samples, double r0);

struct CalibrationPoint {
  double area = 0.0;
  WorkReport report;
};

struct Calibration {
  double C_low = 0.0;           // min |D| / rho_lower
  double C_up_fat = 0.0;        // max |D| / rho_upper_fat
  double C_up_general = 0.0;    // max |D| / rho_upper_general
  double slope = 0.0;           // d log(|gap| / W0) / d log |D|
  double intercept = 0.0;
  int points = 0;
};

/// Needs at least three points with distinct areas and nonzero gaps.
Calibration calibrate(const std::vector<CalibrationPoint>& sweep);

}  // namespace nanoplate

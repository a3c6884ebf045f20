#include "nanoplate/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "nanoplate/error.hpp"

namespace nanoplate {

namespace {

double relative_mismatch(double work, double energy) {
  const double denom = std::abs(work);
  const double diff = std::abs(work - energy);
  return denom > 0.0 ? diff / denom : diff;
}

}  // namespace

WorkReport compute_works(const PlateProblem& with_inclusion, const Solution& u, const PlateProblem& background,
                         const Solution& u0) {
  WorkReport r;
  r.W = with_inclusion.work(u.coefficients());
  r.W0 = background.work(u0.coefficients());
  r.gap = r.W0 - r.W;
  r.residual_u = relative_mismatch(r.W, with_inclusion.energy(u.coefficients()));
  r.residual_u0 = relative_mismatch(r.W0, background.energy(u0.coefficients()));
  if (r.residual_u > 1e-6 || r.residual_u0 > 1e-6) {
    std::ostringstream os;
    os << "quadrature/solver inconsistency: |L(u) - a(u,u)| / |L(u)| = " << r.residual_u << " (u), " << r.residual_u0
       << " (u0)";
    fail(ErrorKind::SolverFailure, os.str());
  }
  return r;
}

double oriented_gap(const WorkReport& report, const JumpClassification& jump) {
  return jump.kind == JumpKind::SofterEverywhere ? -report.gap : report.gap;
}

bool energy_lemma_check(WorkReport& report, const PlateProblem& with_inclusion, const ScalarField& u0,
                        const JumpClassification& jump, double thickness, double slack) {
  if (jump.kind == JumpKind::Indefinite) {
    fail(ErrorKind::InvalidInput, "energy lemma refused: jump classification is indefinite");
  }
  report.slack = slack;
  report.inclusion_energy = with_inclusion.inclusion_integral(u0, thickness);
  const double t3 = thickness * thickness * thickness;
  const double I = report.inclusion_energy;
  const double gap = oriented_gap(report, jump);
  switch (jump.kind) {
    case JumpKind::StifferEverywhere:
      report.regime = "stiffer";
      report.bracket_low = *jump.eta_star * jump.xi0_star() * t3 / *jump.delta_star * I;
      report.bracket_high = (*jump.delta_star - 1.0) * jump.xi1_star() * t3 * I;
      break;
    case JumpKind::SofterEverywhere:
      report.regime = "softer";
      report.bracket_low = *jump.eta_star * jump.xi0_star() * t3 * I;
      report.bracket_high = (1.0 - *jump.delta_lower) * jump.xi1_star() * t3 / *jump.delta_lower * I;
      break;
    default:
      report.regime = "no_contrast";
      report.bracket_low = 0.0;
      report.bracket_high = 0.0;
      break;
  }
  const double floor = 1e-8 * std::abs(report.W0);
  report.bracket_ok =
      gap >= (1.0 - slack) * report.bracket_low - floor && gap <= (1.0 + slack) * report.bracket_high + floor;
  return report.bracket_ok;
}

void size_estimators(WorkReport& report, double r0, const JumpClassification& jump, double p,
                     const std::vector<double>& p_curve, double sign_tolerance) {
  if (jump.kind == JumpKind::Indefinite) {
    fail(ErrorKind::InvalidInput, "size estimators refused: jump classification is indefinite");
  }
  require(p > 1.0, "size estimators: exponent p must exceed 1");
  double gap = oriented_gap(report, jump);
  if (gap < -sign_tolerance * std::abs(report.W0)) {
    std::ostringstream os;
    os << "size estimators refused: work gap " << gap << " has the wrong sign for a "
       << to_string(jump.kind) << " inclusion";
    fail(ErrorKind::InvalidInput, os.str());
  }
  gap = std::max(gap, 0.0);
  const double r02 = r0 * r0;
  const double ratio0 = gap / report.W0;
  report.rho_lower = jump.kind == JumpKind::SofterEverywhere ? r02 * ratio0 : r02 * gap / report.W;
  report.rho_lower_w0 = r02 * ratio0;
  report.rho_upper_fat = r02 * ratio0;
  report.p_used = p;
  report.rho_upper_general = r02 * std::pow(ratio0, 1.0 / p);
  report.general_curve.clear();
  for (double q : p_curve) report.general_curve.emplace_back(q, r02 * std::pow(ratio0, 1.0 / q));
}

double spectral_norm(const std::vector<double>& samples, double perimeter, double r0, double s) {
  const auto n = samples.size();
  if (n == 0) return 0.0;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  std::vector<double> in(samples);
  fft.fwd(spectrum, in);
  double sum = 0.0;
  const auto N = static_cast<long>(n);
  for (long m = 0; m < N; ++m) {
    const long freq = m <= N / 2 ? m : m - N;
    const double k = 2.0 * std::numbers::pi * static_cast<double>(freq) / perimeter;
    const std::complex<double> c = spectrum[static_cast<std::size_t>(m)] / static_cast<double>(N);
    sum += std::norm(c) * std::pow(1.0 + k * k * r0 * r0, s);
  }
  return std::sqrt(perimeter * sum);
}

FRatio f_ratio(const LoopSamples& samples, double r0) {
  const auto n = samples.s.size();
  require(n >= 2 && samples.V.size() == n && samples.Mn.size() == n && samples.Mhn.size() == n,
          "f_ratio: inconsistent loop samples");
  require(r0 > 0.0 && samples.perimeter > 0.0, "f_ratio: r0 and perimeter must be positive");
  const double ds = samples.perimeter / static_cast<double>(n);
  const double tol = 1e-9 * samples.perimeter;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(samples.s[k] - samples.s[0] - ds * static_cast<double>(k)) > tol) {
      fail(ErrorKind::InvalidInput, "f_ratio: non-periodic sampling (samples must be uniform over the closed loop)");
    }
  }
  const double P = samples.perimeter;
  FRatio out;
  out.numerator = spectral_norm(samples.V, P, r0, -1.5) + spectral_norm(samples.Mn, P, r0, -0.5) / r0 +
                  spectral_norm(samples.Mhn, P, r0, 0.5) / (r0 * r0);
  out.denominator = spectral_norm(samples.V, P, r0, -2.5) + spectral_norm(samples.Mn, P, r0, -1.5) / r0 +
                    spectral_norm(samples.Mhn, P, r0, -0.5) / (r0 * r0);
  out.F = out.denominator > 0.0 ? out.numerator / out.denominator : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Calibration calibrate(const std::vector<CalibrationPoint>& sweep) {
  if (sweep.size() < 3) fail(ErrorKind::InvalidInput, "calibrate: degenerate sweep (need at least 3 scenarios)");
  double amin = std::numeric_limits<double>::infinity();
  double amax = 0.0;
  for (const auto& pt : sweep) {
    amin = std::min(amin, pt.area);
    amax = std::max(amax, pt.area);
  }
  if (!(amin > 0.0) || amax - amin <= 1e-12 * amax) {
    fail(ErrorKind::InvalidInput, "calibrate: degenerate sweep (inclusion areas must be positive and distinct)");
  }
  Calibration c;
  c.points = static_cast<int>(sweep.size());
  c.C_low = std::numeric_limits<double>::infinity();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& pt : sweep) {
    const auto& r = pt.report;
    if (!(r.rho_lower > 0.0) || !(r.rho_upper_fat > 0.0) || !(r.rho_upper_general > 0.0)) {
      fail(ErrorKind::InvalidInput, "calibrate: degenerate sweep (zero work gap)");
    }
    c.C_low = std::min(c.C_low, pt.area / r.rho_lower);
    c.C_up_fat = std::max(c.C_up_fat, pt.area / r.rho_upper_fat);
    c.C_up_general = std::max(c.C_up_general, pt.area / r.rho_upper_general);
    const double x = std::log(pt.area);
    const double y = std::log(std::abs(r.gap) / std::abs(r.W0));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(sweep.size());
  c.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  c.intercept = (sy - c.slope * sx) / n;
  return c;
}

}  // namespace nanoplate

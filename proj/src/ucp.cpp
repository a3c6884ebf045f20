#include "nanoplate/ucp.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "nanoplate/error.hpp"
#include "nanoplate/quadrature.hpp"

namespace nanoplate {

namespace {

constexpr double kPi = std::numbers::pi;

double disk_monomial_exact(int a, int b) {
  if (a % 2 != 0 || b % 2 != 0) return 0.0;
  return 2.0 * std::tgamma(0.5 * (a + 1)) * std::tgamma(0.5 * (b + 1)) / std::tgamma(0.5 * (a + b) + 1.0) /
         (a + b + 2);
}

void composite_ball(const Vec2& x0, double r, int n, int radial, int angular,
                    const std::function<void(const Vec2&, double)>& f) {
  const GaussRule& g = gauss_legendre(n);
  const double dr = r / radial;
  const double dt = 2.0 * kPi / angular;
  for (int i = 0; i < radial; ++i) {
    for_each_gauss_point(g, i * dr, (i + 1) * dr, [&](double rho, double wr) {
      for (int j = 0; j < angular; ++j) {
        for_each_gauss_point(g, j * dt, (j + 1) * dt, [&](double th, double wt) {
          f(x0 + rho * Vec2(std::cos(th), std::sin(th)), wr * wt * rho);
        });
      }
    });
  }
}

void require_inside(const Vec2& x0, double r, const RectDomain& domain) {
  if (domain.distance_to_boundary(x0) < r * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "ball of radius " << r << " at (" << x0.x() << ", " << x0.y() << ") exits the domain";
    fail(ErrorKind::DiagnosticsFailure, os.str());
  }
}

template <class F>
void parallel_indices(int n, int threads, F&& f) {
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
        for (int i = t; i < n; i += threads) f(i);
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

int disk_points_for_degree(int degree) {
  static std::mutex mutex;
  static std::map<int, int> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(degree); it != cache.end()) return it->second;
  }
  int found = 0;
  for (int n = 1; n <= 64 && found == 0; ++n) {
    bool ok = true;
    for (int a = 0; a <= degree && ok; ++a) {
      for (int b = 0; a + b <= degree && ok; ++b) {
        double s = 0.0;
        composite_ball(Vec2::Zero(), 1.0, n, 1, 4, [&](const Vec2& x, double w) {
          s += w * std::pow(x.x(), a) * std::pow(x.y(), b);
        });
        ok = std::abs(s - disk_monomial_exact(a, b)) <= 1e-13 * kPi;
      }
    }
    if (ok) found = n;
  }
  if (found == 0) fail(ErrorKind::DiagnosticsFailure, "disk quadrature pre-test failed");
  std::lock_guard<std::mutex> lock(mutex);
  cache[degree] = found;
  return found;
}

void for_each_ball_point(const Vec2& x0, double r, const BallQuadrature& q,
                         const std::function<void(const Vec2&, double)>& f) {
  if (r <= 0.0) return;
  const int n = disk_points_for_degree(q.exact_degree) + q.extra_points;
  int radial = 1;
  int angular = 4;
  if (q.cell_size > 0.0) {
    radial = std::max(1, static_cast<int>(std::ceil(r / q.cell_size)));
    angular = std::max(4, static_cast<int>(std::ceil(2.0 * kPi * r / q.cell_size)));
  }
  composite_ball(x0, r, n, radial, angular, f);
}

double ball_energy(const ScalarField& u, const Vec2& x0, double r, EnergyKind kind, const RectDomain& domain,
                   const BallQuadrature& q) {
  require(r >= 0.0, "ball radius must be non-negative");
  if (r == 0.0) return 0.0;
  require_inside(x0, r, domain);
  double s = 0.0;
  const int order = kind == EnergyKind::Hessian ? 2 : 0;
  for_each_ball_point(x0, r, q, [&](const Vec2& x, double w) {
    const Derivatives d = u.eval(x, order);
    s += w * (kind == EnergyKind::Hessian ? d.tensor_norm2(2) : d.value() * d.value());
  });
  return s;
}

double domain_integral(const ScalarField& u, const RectDomain& domain, int cells, int points, int order,
                       const std::function<double(const Derivatives&)>& f) {
  const GaussRule& g = gauss_legendre(points);
  const double hx = domain.width / cells;
  const double hy = domain.height / cells;
  double s = 0.0;
  for (int j = 0; j < cells; ++j) {
    const double y0 = domain.origin.y() + j * hy;
    for (int i = 0; i < cells; ++i) {
      const double x0 = domain.origin.x() + i * hx;
      for_each_gauss_point(g, y0, y0 + hy, [&](double y, double wy) {
        for_each_gauss_point(g, x0, x0 + hx, [&](double x, double wx) { s += wx * wy * f(u.eval(Vec2(x, y), order)); });
      });
    }
  }
  return s;
}

double theta_hessian(double s, double r) { return 1.0 / (1.0 + 6.0 * 8.0 * std::log2(s / r)); }

double theta_value(double s, double r) { return 1.0 / (1.0 + 2.0 * 8.0 * std::log2(s / r)); }

ThreeSphere three_sphere_check(const ScalarField& u, const Vec2& x0, double s, double r, double R, EnergyKind kind,
                               const RectDomain& domain, const BallQuadrature& q, int cap, bool enforce_ordering) {
  if (cap < 0) cap = kind == EnergyKind::Hessian ? 11 : 8;
  const double limit = R / std::ldexp(1.0, cap);
  if (!(r > 0.0) || !(2.0 * r <= s * (1.0 + 1e-12)) || (enforce_ordering && s > limit * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "radius ordering violated: need 0 < 2r <= s <= R/2^" << cap << " (r=" << r << ", s=" << s
       << ", R=" << R << ")";
    fail(ErrorKind::DiagnosticsFailure, os.str());
  }
  ThreeSphere t;
  t.kind = kind;
  t.s = s;
  t.r = r;
  t.outer = kind == EnergyKind::Hessian ? 0.5 * R : R;
  t.theta = kind == EnergyKind::Hessian ? theta_hessian(s, r) : theta_value(s, r);
  t.Hs = ball_energy(u, x0, s, kind, domain, q);
  t.Hr = ball_energy(u, x0, r, kind, domain, q);
  t.Hout = ball_energy(u, x0, t.outer, kind, domain, q);
  if (!(t.Hr > 0.0) || !(t.Hout > 0.0)) fail(ErrorKind::DiagnosticsFailure, "three-sphere check: vanishing ball energy");
  const double denom = std::pow(t.Hout, 1.0 - t.theta) * std::pow(t.Hr, t.theta);
  t.C_emp = t.Hs / denom;
  t.C_inside = std::pow(t.C_emp, 1.0 / (1.0 - t.theta));
  t.consistency = t.Hs > 0.0 ? std::abs(t.C_emp * denom - t.Hs) / t.Hs : 0.0;
  return t;
}

LpsResult lps_constant(const ScalarField& u, const RectDomain& domain, double s, int grid, double chi,
                       double total_hessian_energy, const BallQuadrature& q) {
  require(s > 0.0 && grid >= 1 && chi > 1.0, "lps: need s > 0, grid >= 1, chi > 1");
  if (!(total_hessian_energy > 0.0)) fail(ErrorKind::DiagnosticsFailure, "lps refused: total Hessian energy is zero");
  LpsResult out;
  out.s = s;
  out.total = total_hessian_energy;
  out.C_s = std::numeric_limits<double>::infinity();
  const double radius = s * domain.r0;
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const Vec2 x = domain.origin + Vec2((i + 0.5) / grid * domain.width, (j + 0.5) / grid * domain.height);
      if (!(domain.distance_to_boundary(x) > chi * radius)) continue;
      ++out.admissible;
      const double c = ball_energy(u, x, radius, EnergyKind::Hessian, domain, q) / total_hessian_energy;
      if (c < out.C_s) {
        out.C_s = c;
        out.argmin = x;
      }
    }
  }
  if (out.admissible == 0) fail(ErrorKind::DiagnosticsFailure, "lps: empty admissible probe grid");
  return out;
}

double ap_left_side(const ScalarField& u, const Vec2& x0, double r, double p, double floor, const RectDomain& domain,
                    const BallQuadrature& q) {
  require(p > 1.0, "A_p check needs p > 1");
  require(r > 0.0, "A_p check needs r > 0");
  require_inside(x0, r, domain);
  double area = 0.0;
  double direct = 0.0;
  double inverse = 0.0;
  const double power = -1.0 / (p - 1.0);
  for_each_ball_point(x0, r, q, [&](const Vec2& x, double w) {
    const double h = u.eval(x, 2).tensor_norm2(2);
    area += w;
    direct += w * h;
    inverse += w * std::pow(std::max(h, floor), power);
  });
  return (direct / area) * std::pow(inverse / area, p - 1.0);
}

CaccioppoliResult caccioppoli_constants(const ScalarField& u, const Vec2& x0, double r, int max_h,
                                        const RectDomain& domain, const BallQuadrature& q) {
  if (max_h < 1 || max_h > u.max_order()) {
    std::ostringstream os;
    os << "insufficient degree: Caccioppoli order " << max_h << " needs derivatives the field does not have (max "
       << u.max_order() << ")";
    fail(ErrorKind::InvalidInput, os.str());
  }
  require_inside(x0, r, domain);
  double u2 = 0.0;
  for_each_ball_point(x0, r, q, [&](const Vec2& x, double w) {
    const double v = u.eval(x, 0).value();
    u2 += w * v * v;
  });
  if (!(u2 > 0.0)) fail(ErrorKind::DiagnosticsFailure, "Caccioppoli check: u vanishes on the ball");
  std::vector<double> d2(static_cast<std::size_t>(max_h), 0.0);
  for_each_ball_point(x0, 0.5 * r, q, [&](const Vec2& x, double w) {
    const Derivatives d = u.eval(x, max_h);
    for (int h = 1; h <= max_h; ++h) d2[static_cast<std::size_t>(h - 1)] += w * d.tensor_norm2(h);
  });
  CaccioppoliResult out;
  out.r = r;
  for (int h = 1; h <= max_h; ++h) {
    out.C.push_back(std::pow(r, h) * std::sqrt(d2[static_cast<std::size_t>(h - 1)] / u2));
  }
  return out;
}

PoincareResult poincare_quotient(const ScalarField& u, const Vec2& x0, double R, double r, const RectDomain& domain,
                                 const BallQuadrature& q) {
  require(r > 0.0 && r <= R, "Poincare check needs 0 < r <= R");
  require_inside(x0, R, domain);
  double area = 0.0;
  double mean = 0.0;
  Vec2 grad = Vec2::Zero();
  for_each_ball_point(x0, r, q, [&](const Vec2& x, double w) {
    const Derivatives d = u.eval(x, 1);
    area += w;
    mean += w * d.value();
    grad += w * d.gradient();
  });
  mean /= area;
  grad /= area;
  PoincareResult out;
  out.R = R;
  out.r = r;
  double v2 = 0.0;
  double g2 = 0.0;
  double h2 = 0.0;
  for_each_ball_point(x0, R, q, [&](const Vec2& x, double w) {
    const Derivatives d = u.eval(x, 2);
    const double v = d.value() - mean - grad.dot(x - x0);
    const Vec2 g = d.gradient() - grad;
    v2 += w * v * v;
    g2 += w * g.squaredNorm();
    h2 += w * d.tensor_norm2(2);
  });
  out.lhs = v2 + R * R * g2;
  out.rhs = std::pow(R, 6) / (r * r) * h2;
  const double scale = v2 / std::pow(R, 4) + g2 / (R * R);
  if (!(h2 > 1e-20 * scale) || !(h2 > 0.0)) {
    fail(ErrorKind::DiagnosticsFailure, "Poincare check refused: Hessian vanishes on the ball (affine input)");
  }
  out.quotient = out.lhs / out.rhs;
  return out;
}

double normalized_sobolev_norm(const ScalarField& u, const RectDomain& domain, int k, int cells, int points) {
  if (k > u.max_order()) {
    std::ostringstream os;
    os << "insufficient degree for an H^" << k << " norm";
    fail(ErrorKind::InvalidInput, os.str());
  }
  const double r0 = domain.r0;
  const double s = domain_integral(u, domain, cells, points, k, [&](const Derivatives& d) {
    double acc = 0.0;
    for (int i = 0; i <= k; ++i) acc += std::pow(r0, 2 * i) * d.tensor_norm2(i);
    return acc;
  });
  return std::sqrt(s) / r0;
}

double interpolation_quotient(const ScalarField& u, const RectDomain& domain, int cells, int points) {
  if (u.max_order() < 4) fail(ErrorKind::InvalidInput, "interpolation check requires degree >= 4");
  const double h2 = normalized_sobolev_norm(u, domain, 2, cells, points);
  const double h3 = normalized_sobolev_norm(u, domain, 3, cells, points);
  const double h4 = normalized_sobolev_norm(u, domain, 4, cells, points);
  if (!(h2 > 0.0) || !(h4 > 0.0)) fail(ErrorKind::DiagnosticsFailure, "interpolation check: vanishing norms");
  return h3 / std::sqrt(h2 * h4);
}

namespace {

ProbeReport evaluate_probe(const ScalarField& u, const RectDomain& domain, const UcpConfig& cfg, const Vec2& center,
                           double floor) {
  ProbeReport pr;
  pr.center = center;
  pr.clearance = domain.distance_to_boundary(center);
  pr.R = cfg.outer_fraction * pr.clearance;
  const double margin = pr.clearance - pr.R;
  if (!(pr.clearance > 0.0) || margin < cfg.quadrature.cell_size) {
    std::ostringstream os;
    os << "probe at (" << center.x() << ", " << center.y() << ") too close to the boundary: clearance "
       << pr.clearance;
    fail(ErrorKind::DiagnosticsFailure, os.str());
  }
  const auto& q = cfg.quadrature;
  for (int k = cfg.radius_levels; k >= 0; --k) pr.radii.push_back(pr.R / std::ldexp(1.0, k));
  for (double r : pr.radii) {
    pr.H.push_back(ball_energy(u, center, r, EnergyKind::Hessian, domain, q));
    pr.U.push_back(ball_energy(u, center, r, EnergyKind::Value, domain, q));
  }
  for (std::size_t k = 1; k < pr.radii.size(); ++k) {
    if (pr.H[k] < pr.H[k - 1] * (1.0 - 1e-12) || pr.U[k] < pr.U[k - 1] * (1.0 - 1e-12)) pr.monotone = false;
    const double ratio = pr.H[k - 1] > 0.0 ? pr.H[k] / pr.H[k - 1] : std::numeric_limits<double>::infinity();
    pr.doubling.push_back(ratio);
    pr.K_emp = std::max(pr.K_emp, ratio);
  }
  const auto level = [&](int k) { return pr.radii.size() - 1 - static_cast<std::size_t>(k); };
  if (cfg.radius_levels >= 9) {
    pr.N = pr.U.back() / pr.U[level(7)];
    pr.N_bar = pr.H.back() / pr.H[level(9)];
  }
  for (EnergyKind kind : {EnergyKind::Hessian, EnergyKind::Value}) {
    const int cap = kind == EnergyKind::Hessian ? cfg.hessian_cap : cfg.value_cap;
    const double s = pr.R / std::ldexp(1.0, cap);
    for (double factor : {0.5, 0.25}) {
      pr.three_sphere.push_back(
          three_sphere_check(u, center, s, factor * s, pr.R, kind, domain, q, cap, cfg.enforce_ordering));
    }
  }
  pr.ap_min = std::numeric_limits<double>::infinity();
  for (double p : cfg.ap_p) {
    double worst = 0.0;
    for (double r : pr.radii) {
      if (r > 0.5 * pr.R) continue;
      const double a = ap_left_side(u, center, r, p, floor, domain, q);
      worst = std::max(worst, a);
      pr.ap_min = std::min(pr.ap_min, a);
    }
    pr.ap.emplace_back(p, worst);
  }
  const int max_h = std::min(cfg.caccioppoli_max_h, u.max_order());
  pr.caccioppoli = caccioppoli_constants(u, center, pr.R, max_h, domain, q);
  pr.poincare = poincare_quotient(u, center, pr.R, 0.5 * pr.R, domain, q);
  return pr;
}

}  // namespace

UcpReport run_ucp(const ScalarField& u, const RectDomain& domain, const UcpConfig& cfg) {
  UcpReport rep;
  rep.total_hessian_energy = domain_integral(u, domain, cfg.integration_cells, cfg.integration_points, 2,
                                             [](const Derivatives& d) { return d.tensor_norm2(2); });
  if (!(rep.total_hessian_energy > 0.0)) {
    fail(ErrorKind::DiagnosticsFailure, "diagnostics refused: total Hessian energy is zero");
  }
  rep.floor = cfg.floor_factor * rep.total_hessian_energy / domain.area();

  const int n = static_cast<int>(cfg.probes.size());
  rep.probes.resize(static_cast<std::size_t>(n));
  parallel_indices(n, cfg.threads, [&](int i) {
    auto& slot = rep.probes[static_cast<std::size_t>(i)];
    try {
      slot = evaluate_probe(u, domain, cfg, cfg.probes[static_cast<std::size_t>(i)], rep.floor);
    } catch (const std::exception& e) {
      slot = ProbeReport{};
      slot.center = cfg.probes[static_cast<std::size_t>(i)];
      slot.clearance = domain.distance_to_boundary(slot.center);
      slot.error = e.what();
    }
  });

  for (double p : cfg.ap_p) {
    double sup = 0.0;
    double sup_half = 0.0;
    for (const auto& pr : rep.probes) {
      if (!pr.error.empty()) continue;
      for (const auto& [pp, v] : pr.ap) {
        if (pp == p) sup = std::max(sup, v);
      }
      for (double r : pr.radii) {
        if (r > 0.5 * pr.R) continue;
        sup_half = std::max(sup_half, ap_left_side(u, pr.center, r, p, 0.5 * rep.floor, domain, cfg.quadrature));
      }
    }
    rep.B_emp.emplace_back(p, sup);
    if (sup > 0.0) rep.floor_sensitivity = std::max(rep.floor_sensitivity, std::abs(sup_half - sup) / sup);
  }
  if (rep.floor_sensitivity >= 0.05) {
    rep.warnings.push_back("A_p: halving the floor changes B_emp by more than 5% (possible non-integrability)");
  }

  for (double s : cfg.lps_s) {
    rep.lps.push_back(lps_constant(u, domain, s, cfg.lps_grid, cfg.chi, rep.total_hessian_energy, cfg.quadrature));
  }
  if (u.max_order() >= 4) {
    rep.interpolation = interpolation_quotient(u, domain, cfg.integration_cells, cfg.integration_points);
  }
  for (const auto& pr : rep.probes) {
    if (!pr.error.empty()) rep.warnings.push_back("probe error: " + pr.error);
  }
  return rep;
}

}  // namespace nanoplate

#include "nanoplate/loads.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "nanoplate/error.hpp"
#include "nanoplate/quadrature.hpp"

namespace nanoplate {

LoadSpec::LoadSpec(std::string name, Density boundary, Volume volume)
    : name_(std::move(name)), boundary_(std::move(boundary)), volume_(std::move(volume)) {}

EdgeLoad LoadSpec::at(const BoundaryPoint& p, double s) const { return boundary_ ? boundary_(p, s) : EdgeLoad{}; }

LoadSpec LoadSpec::scaled(double c) const {
  auto b = boundary_;
  auto v = volume_;
  LoadSpec out(
      name_,
      b ? Density([b, c](const BoundaryPoint& p, double s) {
        const EdgeLoad e = b(p, s);
        return EdgeLoad{c * e.V, c * e.Mn, c * e.Mhn};
      })
        : Density{},
      v ? Volume([v, c](const Vec2& x) { return c * v(x); }) : Volume{});
  out.projection_ = c * projection_;
  return out;
}

double CompatibilityResiduals::max_abs() const {
  return std::max({std::abs(force), std::abs(moment1), std::abs(moment2)});
}

bool CompatibilityResiduals::ok() const {
  return std::abs(force) <= tolerance * force_scale && std::abs(moment1) <= tolerance * moment_scale &&
         std::abs(moment2) <= tolerance * moment_scale;
}

void for_each_boundary_node(const RectDomain& domain, const BoundaryRule& rule,
                            const std::function<void(const BoundaryPoint&, double, double)>& f) {
  const BoundaryChart chart(domain);
  const GaussRule& g = gauss_legendre(rule.points);
  for (Edge e : {Edge::Bottom, Edge::Right, Edge::Top, Edge::Left}) {
    const double start = chart.edge_start(e);
    const double piece = chart.edge_length(e) / rule.segments_per_edge;
    for (int k = 0; k < rule.segments_per_edge; ++k) {
      for_each_gauss_point(g, start + k * piece, start + (k + 1) * piece,
                           [&](double s, double w) { f(chart.at(e, s), s, w); });
    }
  }
}

namespace {

// Integrates the volume load against 1, x1, x2 and |f|.
Eigen::Vector4d volume_moments(const LoadSpec& loads, const RectDomain& domain) {
  Eigen::Vector4d m = Eigen::Vector4d::Zero();
  if (!loads.has_volume()) return m;
  const GaussRule& g = gauss_legendre(8);
  constexpr int n = 32;
  const double hx = domain.width / n;
  const double hy = domain.height / n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x0 = domain.origin.x() + i * hx;
      const double y0 = domain.origin.y() + j * hy;
      for_each_gauss_point(g, x0, x0 + hx, [&](double x, double wx) {
        for_each_gauss_point(g, y0, y0 + hy, [&](double y, double wy) {
          const double f = loads.volume_at(Vec2(x, y));
          const double w = wx * wy;
          m += w * Eigen::Vector4d(f, f * x, f * y, std::abs(f));
        });
      });
    }
  }
  return m;
}

}  // namespace

CompatibilityResiduals compatibility_residuals(const LoadSpec& loads, const RectDomain& domain,
                                               const BoundaryRule& rule, double tolerance) {
  CompatibilityResiduals r;
  r.tolerance = tolerance;
  double v2 = 0.0;
  double m2 = 0.0;
  for_each_boundary_node(domain, rule, [&](const BoundaryPoint& p, double s, double w) {
    const EdgeLoad e = loads.at(p, s);
    r.force += w * e.V;
    r.moment1 += w * (e.V * p.x.x() + e.Mn * p.n.x());
    r.moment2 += w * (e.V * p.x.y() + e.Mn * p.n.y());
    v2 += w * e.V * e.V;
    m2 += w * e.Mn * e.Mn;
  });
  const Eigen::Vector4d vol = volume_moments(loads, domain);
  r.force -= vol[0];
  r.moment1 -= vol[1];
  r.moment2 -= vol[2];
  const double root_p = std::sqrt(domain.perimeter());
  const double reach = domain.diameter() + domain.origin.norm();
  r.force_scale = root_p * std::sqrt(v2) + vol[3];
  r.moment_scale = root_p * (reach * std::sqrt(v2) + std::sqrt(m2)) + reach * vol[3];
  return r;
}

CompatibilityResiduals check_compatibility(const LoadSpec& loads, const RectDomain& domain, const BoundaryRule& rule,
                                           double tolerance) {
  const auto r = compatibility_residuals(loads, domain, rule, tolerance);
  const auto complain = [&](const char* which, double value, double scale) {
    std::ostringstream os;
    os << "incompatible loads: " << which << " = " << value << " exceeds " << tolerance << " x data scale " << scale;
    fail(ErrorKind::IncompatibleLoads, os.str());
  };
  if (!(std::abs(r.force) <= tolerance * r.force_scale)) complain("total force integral of V", r.force, r.force_scale);
  if (!(std::abs(r.moment1) <= tolerance * r.moment_scale))
    complain("moment integral of V x1 + Mn n1", r.moment1, r.moment_scale);
  if (!(std::abs(r.moment2) <= tolerance * r.moment_scale))
    complain("moment integral of V x2 + Mn n2", r.moment2, r.moment_scale);
  return r;
}

LoadSpec zero_load() { return LoadSpec("zero", {}); }

LoadSpec self_equilibrated_load(const RectDomain& domain, int mode, double amplitude, double moment,
                                double high_order) {
  require(mode >= 1, "self_equilibrated: mode must be >= 1");
  const double period = domain.perimeter();
  const double k = 2.0 * std::numbers::pi * mode / period;
  const auto shear = [amplitude, k](double s) { return amplitude * std::cos(k * s); };
  // int V over a full loop vanishes; cancel the moments with Mn = c1 n1 + c2 n2.
  double vx = 0.0;
  double vy = 0.0;
  for_each_boundary_node(domain, {}, [&](const BoundaryPoint& p, double s, double w) {
    vx += w * shear(s) * p.x.x();
    vy += w * shear(s) * p.x.y();
  });
  const double c1 = -vx / (2.0 * domain.height);
  const double c2 = -vy / (2.0 * domain.width);
  std::ostringstream name;
  name << "self_equilibrated(mode=" << mode << ")";
  return LoadSpec(name.str(), [=](const BoundaryPoint& p, double s) {
    return EdgeLoad{shear(s), moment + c1 * p.n.x() + c2 * p.n.y(), high_order};
  });
}

LoadSpec pure_moment_load(double m) {
  return LoadSpec("pure_moment", [m](const BoundaryPoint&, double) { return EdgeLoad{0.0, m, 0.0}; });
}

LoadSpec high_order_moment_load(double mh) {
  return LoadSpec("high_order_moment", [mh](const BoundaryPoint&, double) { return EdgeLoad{0.0, 0.0, mh}; });
}

LoadSpec manufactured_cosine_load(const RectDomain& domain, const BendingOperators& ops) {
  require(std::abs(domain.width - domain.height) <= 1e-14 * domain.width, "manufactured load needs a square domain");
  const auto& c = ops.coefficients();
  const auto sf = strong_form_constants(ops);
  const double k = std::numbers::pi / domain.width;
  const double k2 = k * k;
  const double bending = c.B * (1.0 + c.nu) + 2.0 * c.a0 + 3.0 * c.a1;
  const double moment_factor = k2 * bending + k2 * k2 * 4.0 * sf.c6;
  const double volume_factor = 4.0 * k2 * k2 * sf.c4 + 8.0 * k2 * k2 * k2 * sf.c6;
  const Vec2 o = domain.origin;
  const auto exact = [k, o](const Vec2& x) { return std::cos(k * (x.x() - o.x())) * std::cos(k * (x.y() - o.y())); };
  return LoadSpec(
      "manufactured",
      [=](const BoundaryPoint& p, double) { return EdgeLoad{0.0, moment_factor * exact(p.x), 0.0}; },
      [=](const Vec2& x) { return volume_factor * exact(x); });
}

namespace {

struct EdgeTable {
  std::vector<double> s;
  std::vector<EdgeLoad> v;

  [[nodiscard]] EdgeLoad at(double x) const {
    if (s.empty()) return {};
    if (x <= s.front()) return v.front();
    if (x >= s.back()) return v.back();
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    const auto i = static_cast<std::size_t>(it - s.begin());
    const double t = (x - s[i - 1]) / (s[i] - s[i - 1]);
    const auto lerp = [t](double a, double b) { return a + t * (b - a); };
    return {lerp(v[i - 1].V, v[i].V), lerp(v[i - 1].Mn, v[i].Mn), lerp(v[i - 1].Mhn, v[i].Mhn)};
  }
};

}  // namespace

LoadSpec table_load(const RectDomain& domain, std::vector<LoadSample> samples, const BoundaryRule& rule) {
  require(!samples.empty(), "load table is empty");
  std::vector<EdgeTable> tables(4);
  std::sort(samples.begin(), samples.end(),
            [](const LoadSample& a, const LoadSample& b) { return a.edge != b.edge ? a.edge < b.edge : a.s < b.s; });
  for (const auto& r : samples) {
    require(r.edge >= 0 && r.edge <= 3, "load table: edge id must be 0..3");
    auto& t = tables[static_cast<std::size_t>(r.edge)];
    if (!t.s.empty() && r.s == t.s.back()) {
      t.v.back() = {r.V, r.Mn, r.Mhn};
      continue;
    }
    t.s.push_back(r.s);
    t.v.push_back({r.V, r.Mn, r.Mhn});
  }
  const BoundaryChart chart(domain);
  auto raw = [tables, chart](const BoundaryPoint& p, double s) {
    return tables[static_cast<std::size_t>(p.edge)].at(s - chart.edge_start(p.edge));
  };

  // Gram system of span{1, x1, x2} on the boundary.
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for_each_boundary_node(domain, rule, [&](const BoundaryPoint& p, double s, double w) {
    const Eigen::Vector3d phi(1.0, p.x.x(), p.x.y());
    const EdgeLoad e = raw(p, s);
    gram += w * phi * phi.transpose();
    rhs += w * (e.V * phi + Eigen::Vector3d(0.0, e.Mn * p.n.x(), e.Mn * p.n.y()));
  });
  const Eigen::Vector3d fit = gram.ldlt().solve(rhs);
  LoadSpec out("from_table", [raw, fit](const BoundaryPoint& p, double s) {
    EdgeLoad e = raw(p, s);
    e.V -= fit[0] + fit[1] * p.x.x() + fit[2] * p.x.y();
    return e;
  });
  out.set_projection_magnitude(std::sqrt(std::max(0.0, fit.dot(gram * fit))));
  return out;
}

std::vector<LoadSample> read_load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open load table " + path);
  std::vector<LoadSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    LoadSample r;
    if (!(is >> r.edge >> r.s >> r.V >> r.Mn >> r.Mhn)) {
      if (out.empty() && lineno == 1) continue;  // header
      std::ostringstream os;
      os << "load table " << path << ": malformed line " << lineno;
      fail(ErrorKind::InvalidInput, os.str());
    }
    out.push_back(r);
  }
  return out;
}

LoopSamples sample_loop(const LoadSpec& loads, const RectDomain& domain, int n) {
  require(n >= 2, "sample_loop: need at least two samples");
  const BoundaryChart chart(domain);
  LoopSamples out;
  out.perimeter = chart.perimeter();
  for (int k = 0; k < n; ++k) {
    const double s = out.perimeter * k / n;
    const EdgeLoad e = loads.at(chart.at(s), s);
    out.s.push_back(s);
    out.V.push_back(e.V);
    out.Mn.push_back(e.Mn);
    out.Mhn.push_back(e.Mhn);
  }
  return out;
}

}  // namespace nanoplate

#include "nanoplate/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nanoplate/error.hpp"

namespace nanoplate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_polygon_area(const std::vector<Vec2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * s;
}

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - (a + t * d)).norm();
}

bool polygon_crossing_inside(const std::vector<Vec2>& v, const Vec2& x) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const bool yi = v[i].y() > x.y();
    const bool yj = v[j].y() > x.y();
    if (yi != yj) {
      const double xc = v[j].x() + (x.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

double primitive_scale(const Primitive& p) {
  return std::visit(
      [](const auto& q) -> double {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return q.radius + q.center.norm();
        } else if constexpr (std::is_same_v<T, AxisRect>) {
          return q.half.norm() + q.center.norm();
        } else {
          double s = 0.0;
          for (const auto& v : q.vertices) s = std::max(s, v.norm());
          return s;
        }
      },
      p);
}

// Outward unit normal of a primitive at (or near) a boundary point.
Vec2 outward_normal(const Primitive& p, const Vec2& x) {
  return std::visit(
      [&x](const auto& q) -> Vec2 {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return (x - q.center).normalized();
        } else if constexpr (std::is_same_v<T, AxisRect>) {
          const Vec2 d = x - q.center;
          const double ex = std::abs(std::abs(d.x()) - q.half.x());
          const double ey = std::abs(std::abs(d.y()) - q.half.y());
          if (ex <= ey) return Vec2(d.x() >= 0.0 ? 1.0 : -1.0, 0.0);
          return Vec2(0.0, d.y() >= 0.0 ? 1.0 : -1.0);
        } else {
          const auto& v = q.vertices;
          double best = kInf;
          Vec2 n = Vec2::Zero();
          for (std::size_t i = 0; i < v.size(); ++i) {
            const Vec2& a = v[i];
            const Vec2& b = v[(i + 1) % v.size()];
            const double d = segment_distance(x, a, b);
            if (d < best) {
              best = d;
              const Vec2 e = (b - a).normalized();
              n = Vec2(e.y(), -e.x());  // counterclockwise storage: right-hand normal points out
            }
          }
          return n;
        }
      },
      p);
}

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Circle {
  Vec2 c;
  double r;
};

using Curve = std::variant<Segment, Circle>;

std::vector<Curve> boundary_curves(const Primitive& p) {
  std::vector<Curve> out;
  std::visit(
      [&out](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Disk>) {
          out.emplace_back(Circle{q.center, q.radius});
        } else if constexpr (std::is_same_v<T, AxisRect>) {
          const Vec2 lo = q.center - q.half;
          const Vec2 hi = q.center + q.half;
          const Vec2 c[4] = {lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
          for (int i = 0; i < 4; ++i) out.emplace_back(Segment{c[i], c[(i + 1) % 4]});
        } else {
          const auto& v = q.vertices;
          for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(Segment{v[i], v[(i + 1) % v.size()]});
        }
      },
      p);
  return out;
}

// Points where curve `other` meets curve `self`, reported as parameters of `self`.
void add_crossings(const Curve& self, const Curve& other, std::vector<double>& params) {
  if (const auto* s = std::get_if<Segment>(&self)) {
    const Vec2 d = s->b - s->a;
    if (const auto* o = std::get_if<Segment>(&other)) {
      const Vec2 e = o->b - o->a;
      const double den = cross(d, e);
      const double scale = d.norm() * e.norm();
      if (std::abs(den) <= 1e-14 * scale) {
        // Parallel: only collinear overlaps split the segment.
        if (std::abs(cross(o->a - s->a, d)) <= 1e-12 * d.norm() * (1.0 + (o->a - s->a).norm())) {
          for (const Vec2& q : {o->a, o->b}) {
            const double t = (q - s->a).dot(d) / d.squaredNorm();
            if (t > 0.0 && t < 1.0) params.push_back(t);
          }
        }
        return;
      }
      const double t = cross(o->a - s->a, e) / den;
      const double u = cross(o->a - s->a, d) / den;
      if (t > 0.0 && t < 1.0 && u >= -1e-14 && u <= 1.0 + 1e-14) params.push_back(t);
    } else {
      const auto& c = std::get<Circle>(other);
      const Vec2 f = s->a - c.c;
      const double A = d.squaredNorm();
      const double Bq = 2.0 * f.dot(d);
      const double C = f.squaredNorm() - c.r * c.r;
      const double disc = Bq * Bq - 4.0 * A * C;
      if (disc < 0.0) return;
      const double sq = std::sqrt(disc);
      for (double t : {(-Bq - sq) / (2.0 * A), (-Bq + sq) / (2.0 * A)}) {
        if (t > 0.0 && t < 1.0) params.push_back(t);
      }
    }
    return;
  }
  const auto& c = std::get<Circle>(self);
  const auto add_point = [&](const Vec2& x) {
    double th = std::atan2(x.y() - c.c.y(), x.x() - c.c.x());
    if (th < 0.0) th += 2.0 * std::numbers::pi;
    params.push_back(th);
  };
  if (const auto* o = std::get_if<Segment>(&other)) {
    std::vector<double> ts;
    add_crossings(Curve{*o}, Curve{c}, ts);
    for (double t : ts) add_point(o->a + t * (o->b - o->a));
    // Segment endpoints lying on the circle.
    for (const Vec2& q : {o->a, o->b}) {
      if (std::abs((q - c.c).norm() - c.r) <= 1e-13 * (1.0 + c.r)) add_point(q);
    }
    return;
  }
  const auto& o = std::get<Circle>(other);
  const Vec2 delta = o.c - c.c;
  const double dist = delta.norm();
  if (dist == 0.0 || dist > c.r + o.r || dist < std::abs(c.r - o.r)) return;
  const double a = (c.r * c.r - o.r * o.r + dist * dist) / (2.0 * dist);
  const double h = std::sqrt(std::max(0.0, c.r * c.r - a * a));
  const Vec2 mid = c.c + a * delta / dist;
  const Vec2 perp(-delta.y() / dist, delta.x() / dist);
  add_point(mid + h * perp);
  add_point(mid - h * perp);
}

}  // namespace

bool RectDomain::contains(const Vec2& x, double tol) const {
  const Vec2 hi = upper();
  return x.x() >= origin.x() - tol && x.x() <= hi.x() + tol && x.y() >= origin.y() - tol && x.y() <= hi.y() + tol;
}

double RectDomain::distance_to_boundary(const Vec2& x) const {
  const Vec2 hi = upper();
  return std::min({x.x() - origin.x(), hi.x() - x.x(), x.y() - origin.y(), hi.y() - x.y()});
}

void RectDomain::validate() const {
  require(std::isfinite(origin.x()) && std::isfinite(origin.y()), "domain origin must be finite");
  require(width > 0.0 && height > 0.0, "domain width and height must be positive");
  require(r0 > 0.0, "domain r0 must be positive");
  require(M1 > 0.0, "domain M1 must be positive");
}

BoundaryChart::BoundaryChart(const RectDomain& domain) : domain_(domain) { domain_.validate(); }

double BoundaryChart::edge_start(Edge e) const {
  const double w = domain_.width;
  const double h = domain_.height;
  switch (e) {
    case Edge::Bottom:
      return 0.0;
    case Edge::Right:
      return w;
    case Edge::Top:
      return w + h;
    case Edge::Left:
      return 2.0 * w + h;
  }
  return 0.0;
}

double BoundaryChart::edge_length(Edge e) const {
  return (e == Edge::Bottom || e == Edge::Top) ? domain_.width : domain_.height;
}

BoundaryPoint BoundaryChart::at(Edge e, double s) const {
  const double local = std::clamp(s - edge_start(e), 0.0, edge_length(e));
  const Vec2 lo = domain_.origin;
  const Vec2 hi = domain_.upper();
  BoundaryPoint p;
  p.edge = e;
  switch (e) {
    case Edge::Bottom:
      p.x = Vec2(lo.x() + local, lo.y());
      p.n = Vec2(0.0, -1.0);
      break;
    case Edge::Right:
      p.x = Vec2(hi.x(), lo.y() + local);
      p.n = Vec2(1.0, 0.0);
      break;
    case Edge::Top:
      p.x = Vec2(hi.x() - local, hi.y());
      p.n = Vec2(0.0, 1.0);
      break;
    case Edge::Left:
      p.x = Vec2(lo.x(), hi.y() - local);
      p.n = Vec2(-1.0, 0.0);
      break;
  }
  p.tau = Vec2(-p.n.y(), p.n.x());
  return p;
}

BoundaryPoint BoundaryChart::at(double s) const {
  require(s >= 0.0 && s <= perimeter(), "boundary chart: arclength out of range");
  for (Edge e : {Edge::Bottom, Edge::Right, Edge::Top}) {
    if (s < edge_start(e) + edge_length(e)) return at(e, s);
  }
  return at(Edge::Left, s);
}

double signed_distance(const Primitive& p, const Vec2& x) {
  return std::visit(
      [&x](const auto& q) -> double {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return (x - q.center).norm() - q.radius;
        } else if constexpr (std::is_same_v<T, AxisRect>) {
          const Vec2 d = (x - q.center).cwiseAbs() - q.half;
          const Vec2 outside = d.cwiseMax(0.0);
          return outside.norm() + std::min(std::max(d.x(), d.y()), 0.0);
        } else {
          double best = kInf;
          const auto& v = q.vertices;
          for (std::size_t i = 0; i < v.size(); ++i) best = std::min(best, segment_distance(x, v[i], v[(i + 1) % v.size()]));
          return polygon_crossing_inside(v, x) ? -best : best;
        }
      },
      p);
}

bool primitive_contains(const Primitive& p, const Vec2& x) {
  if (const auto* poly = std::get_if<Polygon>(&p)) {
    const double d = signed_distance(p, x);
    return d <= 1e-14 * (1.0 + primitive_scale(p)) || polygon_crossing_inside(poly->vertices, x);
  }
  return signed_distance(p, x) <= 0.0;
}

double primitive_area(const Primitive& p) {
  return std::visit(
      [](const auto& q) -> double {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return std::numbers::pi * q.radius * q.radius;
        } else if constexpr (std::is_same_v<T, AxisRect>) {
          return 4.0 * q.half.x() * q.half.y();
        } else {
          return std::abs(signed_polygon_area(q.vertices));
        }
      },
      p);
}

std::string describe(const Primitive& p) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Disk>) {
          os << "disk(c=(" << q.center.x() << "," << q.center.y() << "), r=" << q.radius << ")";
        } else if constexpr (std::is_same_v<T, AxisRect>) {
          os << "rect(c=(" << q.center.x() << "," << q.center.y() << "), half=(" << q.half.x() << "," << q.half.y()
             << "))";
        } else {
          os << "polygon(" << q.vertices.size() << " vertices)";
        }
      },
      p);
  return os.str();
}

InclusionSet::InclusionSet(std::vector<Primitive> primitives, double d0) : primitives_(std::move(primitives)), d0_(d0) {
  require(d0_ >= 0.0, "inclusion clearance d0 must be non-negative");
  for (auto& p : primitives_) {
    if (auto* disk = std::get_if<Disk>(&p)) {
      require(disk->radius > 0.0, "disk radius must be positive");
    } else if (auto* rect = std::get_if<AxisRect>(&p)) {
      require(rect->half.x() > 0.0 && rect->half.y() > 0.0, "rectangle half-widths must be positive");
    } else {
      auto& poly = std::get<Polygon>(p);
      require(poly.vertices.size() >= 3, "polygon needs at least 3 vertices");
      const double a = signed_polygon_area(poly.vertices);
      require(std::abs(a) > 0.0, "polygon must have positive area");
      if (a < 0.0) std::reverse(poly.vertices.begin(), poly.vertices.end());
    }
  }
}

bool InclusionSet::contains(const Vec2& x) const {
  return std::any_of(primitives_.begin(), primitives_.end(), [&x](const Primitive& p) { return primitive_contains(p, x); });
}

double InclusionSet::signed_distance_bound(const Vec2& x) const {
  double best = kInf;
  for (const auto& p : primitives_) best = std::min(best, signed_distance(p, x));
  return best;
}

std::optional<BoundingBox> InclusionSet::bounding_box() const {
  if (primitives_.empty()) return std::nullopt;
  BoundingBox box{Vec2::Constant(kInf), Vec2::Constant(-kInf)};
  for (const auto& p : primitives_) {
    std::visit(
        [&box](const auto& q) {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, Disk>) {
            box.lo = box.lo.cwiseMin(q.center - Vec2::Constant(q.radius));
            box.hi = box.hi.cwiseMax(q.center + Vec2::Constant(q.radius));
          } else if constexpr (std::is_same_v<T, AxisRect>) {
            box.lo = box.lo.cwiseMin(q.center - q.half);
            box.hi = box.hi.cwiseMax(q.center + q.half);
          } else {
            for (const auto& v : q.vertices) {
              box.lo = box.lo.cwiseMin(v);
              box.hi = box.hi.cwiseMax(v);
            }
          }
        },
        p);
  }
  return box;
}

bool InclusionSet::analytic_pairwise_disjoint() const {
  for (const auto& p : primitives_) {
    if (std::holds_alternative<Polygon>(p)) return false;
  }
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    for (std::size_t j = i + 1; j < primitives_.size(); ++j) {
      const auto& a = primitives_[i];
      const auto& b = primitives_[j];
      bool separated = false;
      if (std::holds_alternative<Disk>(a) && std::holds_alternative<Disk>(b)) {
        const auto& da = std::get<Disk>(a);
        const auto& db = std::get<Disk>(b);
        separated = (da.center - db.center).norm() > da.radius + db.radius;
      } else if (std::holds_alternative<AxisRect>(a) && std::holds_alternative<AxisRect>(b)) {
        const auto& ra = std::get<AxisRect>(a);
        const auto& rb = std::get<AxisRect>(b);
        const Vec2 gap = (ra.center - rb.center).cwiseAbs() - ra.half - rb.half;
        separated = gap.x() > 0.0 || gap.y() > 0.0;
      } else {
        const auto& disk = std::holds_alternative<Disk>(a) ? std::get<Disk>(a) : std::get<Disk>(b);
        const auto& rect = std::holds_alternative<AxisRect>(a) ? a : b;
        separated = signed_distance(rect, disk.center) > disk.radius;
      }
      if (!separated) return false;
    }
  }
  return true;
}

double InclusionSet::distance_to_domain_boundary(const RectDomain& domain) const {
  double best = kInf;
  for (const auto& p : primitives_) {
    std::visit(
        [&](const auto& q) {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, Disk>) {
            best = std::min(best, domain.distance_to_boundary(q.center) - q.radius);
          } else if constexpr (std::is_same_v<T, AxisRect>) {
            const Vec2 lo = q.center - q.half;
            const Vec2 hi = q.center + q.half;
            const Vec2 dhi = domain.upper();
            best = std::min({best, lo.x() - domain.origin.x(), lo.y() - domain.origin.y(), dhi.x() - hi.x(),
                             dhi.y() - hi.y()});
          } else {
            // The domain is convex: the polygon's closest approach is at a vertex.
            for (const auto& v : q.vertices) best = std::min(best, domain.distance_to_boundary(v));
          }
        },
        p);
  }
  return best;
}

void InclusionSet::validate(const RectDomain& domain) const {
  if (primitives_.empty()) return;
  const double dist = distance_to_domain_boundary(domain);
  require(dist > 0.0, "inclusion must lie strictly inside the domain");
  if (d0_ > 0.0) {
    std::ostringstream os;
    os << "inclusion clearance " << dist << " below d0*r0 = " << d0_ * domain.r0;
    require(dist >= d0_ * domain.r0, os.str());
  }
}

double area(const InclusionSet& set) {
  const auto& prims = set.primitives();
  if (prims.empty()) return 0.0;
  if (prims.size() == 1 || set.analytic_pairwise_disjoint()) {
    double s = 0.0;
    for (const auto& p : prims) s += primitive_area(p);
    return s;
  }
  // Green's theorem on the boundary of the union: keep the pieces of each primitive boundary that
  // are not interior to another primitive; shared edges are counted once.
  double scale = 0.0;
  for (const auto& p : prims) scale = std::max(scale, primitive_scale(p));
  const double eps = 1e-11 * (1.0 + scale);

  std::vector<std::vector<Curve>> curves;
  curves.reserve(prims.size());
  for (const auto& p : prims) curves.push_back(boundary_curves(p));

  const auto keep = [&](std::size_t i, const Vec2& x) {
    const Vec2 ni = outward_normal(prims[i], x);
    for (std::size_t j = 0; j < prims.size(); ++j) {
      if (j == i) continue;
      const double sd = signed_distance(prims[j], x);
      if (sd < -eps) return false;
      if (sd <= eps) {
        const double align = ni.dot(outward_normal(prims[j], x));
        if (align < 0.0) return false;
        if (j < i) return false;
      }
    }
    return true;
  };

  double total = 0.0;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    for (const Curve& curve : curves[i]) {
      std::vector<double> params;
      const bool is_circle = std::holds_alternative<Circle>(curve);
      params.push_back(0.0);
      params.push_back(is_circle ? 2.0 * std::numbers::pi : 1.0);
      for (std::size_t j = 0; j < prims.size(); ++j) {
        if (j == i) continue;
        for (const Curve& other : curves[j]) add_crossings(curve, other, params);
      }
      std::sort(params.begin(), params.end());
      for (std::size_t k = 0; k + 1 < params.size(); ++k) {
        const double a = params[k];
        const double b = params[k + 1];
        if (b - a <= 1e-15) continue;
        if (const auto* s = std::get_if<Segment>(&curve)) {
          const Vec2 pa = s->a + a * (s->b - s->a);
          const Vec2 pb = s->a + b * (s->b - s->a);
          if (keep(i, 0.5 * (pa + pb))) total += 0.5 * cross(pa, pb);
        } else {
          const auto& c = std::get<Circle>(curve);
          const double m = 0.5 * (a + b);
          const Vec2 mid = c.c + c.r * Vec2(std::cos(m), std::sin(m));
          if (keep(i, mid)) {
            total += 0.5 * (c.r * c.r * (b - a) + c.r * c.c.x() * (std::sin(b) - std::sin(a)) -
                            c.r * c.c.y() * (std::cos(b) - std::cos(a)));
          }
        }
      }
    }
  }
  return total;
}

bool RasterMask::contains(const Vec2& x) const {
  const double fx = (x.x() - origin.x()) / cell;
  const double fy = (x.y() - origin.y()) / cell;
  if (fx < 0.0 || fy < 0.0) return false;
  const auto ix = static_cast<long>(fx);
  const auto iy = static_cast<long>(fy);
  if (ix >= nx || iy >= ny) return false;
  return inside[static_cast<std::size_t>(iy * nx + ix)] != 0;
}

double RasterMask::area() const {
  const auto count = std::count(inside.begin(), inside.end(), static_cast<unsigned char>(1));
  return static_cast<double>(count) * cell * cell;
}

ErodedSet::ErodedSet(InclusionSet source, double depth, std::variant<InclusionSet, RasterMask> representation)
    : source_(std::move(source)), depth_(depth), repr_(std::move(representation)) {}

double ErodedSet::raster_cell() const {
  if (const auto* mask = std::get_if<RasterMask>(&repr_)) return mask->cell;
  return 0.0;
}

bool ErodedSet::contains(const Vec2& x) const {
  return std::visit([&x](const auto& r) { return r.contains(x); }, repr_);
}

double ErodedSet::area() const {
  if (const auto* set = std::get_if<InclusionSet>(&repr_)) return nanoplate::area(*set);
  return std::get<RasterMask>(repr_).area();
}

namespace {

// Squared 1D distance transform (Felzenszwalb-Huttenlocher) of f, in place.
void distance_transform_1d(std::vector<double>& f, std::vector<double>& out, std::vector<int>& v,
                           std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[k]] == kInf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (k > 0 && s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (f[v[0]] == kInf) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
}

}  // namespace

ErodedSet erode(const InclusionSet& set, double h, long max_pixels) {
  require(h >= 0.0 && std::isfinite(h), "erosion depth must be non-negative");
  if (set.empty() || h == 0.0) return ErodedSet(set, h, set);

  if (set.analytic_pairwise_disjoint()) {
    std::vector<Primitive> shrunk;
    for (const auto& p : set.primitives()) {
      if (const auto* disk = std::get_if<Disk>(&p)) {
        if (disk->radius > h) shrunk.emplace_back(Disk{disk->center, disk->radius - h});
      } else {
        const auto& rect = std::get<AxisRect>(p);
        const Vec2 half = rect.half - Vec2::Constant(h);
        if (half.x() > 0.0 && half.y() > 0.0) shrunk.emplace_back(AxisRect{rect.center, half});
      }
    }
    return ErodedSet(set, h, InclusionSet(std::move(shrunk)));
  }

  const auto box = *set.bounding_box();
  const Vec2 extent = box.hi - box.lo;
  double cell = std::min(h / 50.0, std::max(extent.x(), extent.y()) / 256.0);
  const double pixels = (extent.x() / cell) * (extent.y() / cell);
  if (pixels > static_cast<double>(max_pixels)) cell = std::sqrt(extent.x() * extent.y() / static_cast<double>(max_pixels));

  constexpr int pad = 2;
  RasterMask mask;
  mask.cell = cell;
  mask.origin = box.lo - Vec2::Constant(pad * cell);
  mask.nx = static_cast<int>(std::ceil(extent.x() / cell)) + 2 * pad;
  mask.ny = static_cast<int>(std::ceil(extent.y() / cell)) + 2 * pad;
  const auto nx = static_cast<std::size_t>(mask.nx);
  const auto ny = static_cast<std::size_t>(mask.ny);

  // Squared pixel distance from inside pixels to the nearest outside pixel center.
  std::vector<double> dist2(nx * ny);
  std::vector<unsigned char> in(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Vec2 c = mask.origin + cell * Vec2(ix + 0.5, iy + 0.5);
      in[iy * nx + ix] = set.contains(c) ? 1 : 0;
      dist2[iy * nx + ix] = in[iy * nx + ix] ? kInf : 0.0;
    }
  }
  {
    std::vector<double> f(ny), out(ny), z(ny + 1);
    std::vector<int> v(ny);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      for (std::size_t iy = 0; iy < ny; ++iy) f[iy] = dist2[iy * nx + ix];
      distance_transform_1d(f, out, v, z);
      for (std::size_t iy = 0; iy < ny; ++iy) dist2[iy * nx + ix] = out[iy];
    }
  }
  {
    std::vector<double> f(nx), out(nx), z(nx + 1);
    std::vector<int> v(nx);
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (std::size_t ix = 0; ix < nx; ++ix) f[ix] = dist2[iy * nx + ix];
      distance_transform_1d(f, out, v, z);
      for (std::size_t ix = 0; ix < nx; ++ix) dist2[iy * nx + ix] = out[ix];
    }
  }
  mask.inside.assign(nx * ny, 0);
  for (std::size_t k = 0; k < nx * ny; ++k) {
    // The set boundary sits half a pixel before the nearest outside center.
    if (in[k] && (std::sqrt(dist2[k]) - 0.5) * cell > h) mask.inside[k] = 1;
  }
  return ErodedSet(set, h, std::move(mask));
}

FatnessResult fatness_check(const InclusionSet& set, double h1, double r0) {
  require(h1 >= 0.0 && r0 > 0.0, "fatness_check: h1 >= 0 and r0 > 0 required");
  FatnessResult out;
  out.h1 = h1;
  out.area = area(set);
  if (!(out.area > 0.0)) fail(ErrorKind::InvalidInput, "fatness_check: empty inclusion");
  out.eroded_area = erode(set, h1 * r0).area();
  out.margin = out.eroded_area / out.area - 0.5;
  out.fat = out.margin >= 0.0;
  return out;
}

}  // namespace nanoplate

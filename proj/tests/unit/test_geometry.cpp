#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nanoplate/error.hpp"
#include "nanoplate/geometry.hpp"

using namespace nanoplate;
using std::numbers::pi;

namespace {

double lens_area(double r1, double r2, double d) {
  const double a = r1 * r1 * std::acos((d * d + r1 * r1 - r2 * r2) / (2 * d * r1));
  const double b = r2 * r2 * std::acos((d * d + r2 * r2 - r1 * r1) / (2 * d * r2));
  const double c = 0.5 * std::sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2));
  return a + b - c;
}

}  // namespace

TEST_CASE("area of single, empty and overlapping sets") {
  CHECK(area(InclusionSet({Disk{{0.5, 0.5}, 0.25}})) == doctest::Approx(pi / 16).epsilon(1e-14));
  CHECK(area(InclusionSet{}) == 0.0);

  const InclusionSet rects({AxisRect{{0.0, 0.0}, {0.5, 0.5}}, AxisRect{{0.5, 0.5}, {0.5, 0.5}}});
  CHECK(std::abs(area(rects) - 1.75) <= 1e-6);

  const double r1 = 0.2, r2 = 0.15, d = 0.25;
  const InclusionSet disks({Disk{{0.4, 0.5}, r1}, Disk{{0.4 + d, 0.5}, r2}});
  const double expected = pi * (r1 * r1 + r2 * r2) - lens_area(r1, r2, d);
  CHECK(std::abs(area(disks) - expected) <= 1e-6 * expected);

  // Disk fully covering a rectangle: union is the disk.
  const InclusionSet nested({Disk{{0.5, 0.5}, 0.3}, AxisRect{{0.5, 0.5}, {0.1, 0.1}}});
  CHECK(std::abs(area(nested) - pi * 0.09) <= 1e-6 * pi * 0.09);

  // Polygon equal to a rectangle, overlapping the same rectangle exactly.
  const InclusionSet same({AxisRect{{0.5, 0.5}, {0.2, 0.1}},
                           Polygon{{{0.3, 0.4}, {0.7, 0.4}, {0.7, 0.6}, {0.3, 0.6}}}});
  CHECK(std::abs(area(same) - 0.08) <= 1e-9);
}

TEST_CASE("indicator uses the closed-set convention") {
  const InclusionSet s({Disk{{0.5, 0.5}, 0.2}});
  CHECK(s.contains({0.5, 0.5}));
  CHECK(s.contains({0.7, 0.5}));
  CHECK_FALSE(s.contains({0.1, 0.1}));
  const InclusionSet poly({Polygon{{{0.2, 0.2}, {0.2, 0.6}, {0.6, 0.2}}}});  // clockwise input
  CHECK(poly.contains({0.3, 0.3}));
  CHECK_FALSE(poly.contains({0.55, 0.55}));
}

TEST_CASE("analytic erosion") {
  const InclusionSet d({Disk{{0.5, 0.5}, 0.3}});
  const auto e = erode(d, 0.1);
  CHECK(e.is_analytic());
  CHECK(e.area() == doctest::Approx(0.04 * pi).epsilon(1e-14));
  CHECK(erode(d, 0.3).area() == 0.0);
  const InclusionSet r({AxisRect{{0.5, 0.5}, {0.3, 0.2}}});
  CHECK(erode(r, 0.05).area() == doctest::Approx(0.5 * 0.3).epsilon(1e-14));
}

TEST_CASE("raster erosion of an L-shape") {
  // L = [0.1, 0.7] x [0.1, 0.4] union [0.1, 0.4] x [0.1, 0.7]; arm width a = 0.3, length 0.6.
  const InclusionSet L({AxisRect{{0.4, 0.25}, {0.3, 0.15}}, AxisRect{{0.25, 0.4}, {0.15, 0.3}}});
  const double h = 0.03, a = 0.3, len = 0.6;
  const double arms = 2 * (len - 2 * h) * (a - 2 * h) - (a - 2 * h) * (a - 2 * h);
  const double exact = arms + h * h * (1.0 - pi / 4);  // reflex corner is rounded
  const auto e = erode(L, h);
  CHECK_FALSE(e.is_analytic());
  CHECK(e.raster_cell() <= h / 50 + 1e-15);
  CHECK(std::abs(e.area() - exact) <= 0.02 * exact);

  CHECK(std::abs(erode(L, 0.0).area() - area(L)) <= 0.02 * area(L));
  double prev = area(L);
  for (double hh : {0.01, 0.02, 0.05, 0.1, 0.14, 0.16, 0.18}) {
    const double a2 = erode(L, hh).area();
    CHECK(a2 <= prev + 1e-12);
    prev = a2;
  }
  // largest inscribed disk sits in the corner square with radius 0.3 / (1 + sqrt 2)
  CHECK(erode(L, 0.16).area() > 0.0);
  CHECK(erode(L, 0.18).area() == 0.0);
}

TEST_CASE("fatness examples") {
  const double R = 0.2;
  const InclusionSet d({Disk{{0.5, 0.5}, R}});
  CHECK(std::abs(fatness_check(d, R * (1 - 1 / std::sqrt(2.0)), 1.0).margin) <= 1e-14);
  const auto f = fatness_check(d, 0.1 * R, 1.0);
  CHECK(f.fat);
  CHECK(f.margin == doctest::Approx(0.31).epsilon(1e-12));
  const InclusionSet thin({AxisRect{{0.5, 0.5}, {0.5, 0.005}}});
  const auto g = fatness_check(thin, 0.02, 1.0);
  CHECK_FALSE(g.fat);
  CHECK(g.eroded_area == 0.0);
  CHECK_THROWS_AS(fatness_check(InclusionSet{}, 0.05, 1.0), Error);
  // h1 is dimensionless: depth h1 r0.
  CHECK(fatness_check(d, 0.05, 2.0).margin == doctest::Approx(0.25 - 0.5).epsilon(1e-12));
}

TEST_CASE("boundary chart") {
  const RectDomain dom;
  const BoundaryChart chart(dom);
  CHECK(chart.perimeter() == 4.0);
  const auto p0 = chart.at(0.0);
  CHECK(p0.n.isApprox(Vec2(0, -1)));
  CHECK(p0.tau.isApprox(Vec2(1, 0)));
  CHECK((chart.at(4.0).x - p0.x).norm() <= 1e-14);
  Vec2 integral = Vec2::Zero();
  for (int e = 0; e < 4; ++e) {
    const auto q = chart.at(static_cast<Edge>(e), 0.5 * chart.edge_length(static_cast<Edge>(e)));
    integral += q.n * chart.edge_length(static_cast<Edge>(e));
    CHECK(std::abs(q.tau.x() + q.n.y()) <= 1e-15);  // tau = e3 x n = (-n2, n1)
    CHECK(std::abs(q.tau.y() - q.n.x()) <= 1e-15);
  }
  CHECK(integral.norm() <= 1e-14);
}

TEST_CASE("inclusion validation against the domain") {
  const RectDomain dom;
  InclusionSet ok({Disk{{0.5, 0.5}, 0.12}}, 0.1);
  CHECK_NOTHROW(ok.validate(dom));
  CHECK(ok.distance_to_domain_boundary(dom) >= 0.1);
  InclusionSet close({Disk{{0.5, 0.5}, 0.45}}, 0.1);
  CHECK_THROWS_AS(close.validate(dom), Error);
  InclusionSet outside({Disk{{0.95, 0.5}, 0.1}});
  CHECK_THROWS_AS(outside.validate(dom), Error);
}

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "nanoplate/error.hpp"
#include "nanoplate/estimates.hpp"
#include "nanoplate/loads.hpp"

using namespace nanoplate;
using std::numbers::pi;

namespace {

LoopSamples single_mode(const RectDomain& dom, int n, std::initializer_list<std::pair<int, double>> modes) {
  LoopSamples s;
  s.perimeter = dom.perimeter();
  for (int k = 0; k < n; ++k) {
    const double t = s.perimeter * k / n;
    double v = 0.0;
    for (const auto& [m, a] : modes) v += a * std::cos(2 * pi * m * t / s.perimeter);
    s.s.push_back(t);
    s.V.push_back(v);
    s.Mn.push_back(0.0);
    s.Mhn.push_back(0.0);
  }
  return s;
}

JumpClassification stiffer() {
  JumpClassification j;
  j.kind = JumpKind::StifferEverywhere;
  return j;
}

}  // namespace

TEST_CASE("compatibility gate") {
  const RectDomain dom;
  const LoadSpec shear("shear", [](const BoundaryPoint&, double) { return EdgeLoad{1.0, 0.0, 0.0}; });
  const auto r = compatibility_residuals(shear, dom);
  CHECK(r.force == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_FALSE(r.ok());
  try {
    check_compatibility(shear, dom);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IncompatibleLoads);
  }

  const LoadSpec moment("moment", [](const BoundaryPoint&, double) { return EdgeLoad{0.0, 2.5, -7.0}; });
  CHECK(compatibility_residuals(moment, dom).max_abs() <= 1e-14);

  for (int mode : {1, 2, 3}) {
    for (const RectDomain& d : {RectDomain{}, RectDomain{{0.3, -0.1}, 1.5, 0.8}}) {
      const auto c = compatibility_residuals(self_equilibrated_load(d, mode, 1.3, 0.7, 0.2), d);
      CHECK(c.max_abs() <= 1e-12);
      CHECK(c.ok());
    }
  }
}

TEST_CASE("table loads are projected onto the compatible subspace") {
  const RectDomain dom;
  std::vector<LoadSample> rows;
  for (int e = 0; e < 4; ++e) {
    rows.push_back({e, 0.0, 1.0, 0.0, 0.0});
    rows.push_back({e, 1.0, 1.0, 0.0, 0.0});
  }
  const auto loads = table_load(dom, rows);
  CHECK(loads.projection_magnitude() == doctest::Approx(2.0).epsilon(1e-10));  // |1| over a loop of length 4
  CHECK(compatibility_residuals(loads, dom).max_abs() <= 1e-12);

  const std::string path = (std::filesystem::temp_directory_path() / "nanoplate_table_load_test.csv").string();
  {
    std::ofstream out(path);
    out << "edge,s,V,Mn,Mhn\n0,0,1,0,0\n0,1,2,0.5,0\n";
  }
  const auto read = read_load_table(path);
  REQUIRE(read.size() == 2);
  CHECK(read[1].V == 2.0);
  CHECK(read[1].Mn == 0.5);
  std::filesystem::remove(path);
}

TEST_CASE("size estimator arithmetic") {
  WorkReport r;
  r.W0 = 1.0;
  r.W = 0.95;
  r.gap = 0.05;
  size_estimators(r, 2.0, stiffer());
  CHECK(r.rho_lower == doctest::Approx(4.0 * 0.05 / 0.95).epsilon(1e-14));
  CHECK(r.rho_upper_fat == doctest::Approx(4.0 * 0.05).epsilon(1e-14));
  CHECK(r.rho_upper_general == doctest::Approx(4.0 * std::sqrt(0.05)).epsilon(1e-14));
  REQUIRE(r.general_curve.size() == 4);

  WorkReport g;
  g.W0 = 1.0;
  g.W = 0.96;
  g.gap = 0.04;
  size_estimators(g, 1.0, stiffer(), 2.0);
  CHECK(g.rho_upper_general == doctest::Approx(0.2).epsilon(1e-14));

  WorkReport zero;
  zero.W0 = zero.W = 1.0;
  size_estimators(zero, 1.0, stiffer());
  CHECK(zero.rho_lower == 0.0);
  CHECK(zero.rho_upper_fat == 0.0);
  CHECK(zero.rho_upper_general == 0.0);

  WorkReport wrong;
  wrong.W0 = 1.0;
  wrong.W = 1.1;
  wrong.gap = -0.1;
  CHECK_THROWS_AS(size_estimators(wrong, 1.0, stiffer()), Error);
  JumpClassification indefinite;
  CHECK_THROWS_AS(size_estimators(r, 1.0, indefinite), Error);

  JumpClassification softer;
  softer.kind = JumpKind::SofterEverywhere;
  WorkReport s;
  s.W0 = 1.0;
  s.W = 1.05;
  s.gap = -0.05;
  size_estimators(s, 1.0, softer);
  CHECK(s.rho_lower == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("F ratio closed forms") {
  const RectDomain dom;
  for (double r0 : {1.0, 0.5}) {
    const double k1 = 2 * pi / dom.perimeter();
    const auto f = f_ratio(single_mode(dom, 256, {{1, 1.0}}), r0);
    CHECK(f.F == doctest::Approx(std::sqrt(1 + k1 * k1 * r0 * r0)).epsilon(1e-12));
  }
  CHECK(f_ratio(single_mode(dom, 128, {{0, 1.0}}), 1.0).F == doctest::Approx(1.0).epsilon(1e-14));

  const double f1 = f_ratio(single_mode(dom, 256, {{1, 1.0}}), 1.0).F;
  const double f3 = f_ratio(single_mode(dom, 256, {{3, 1.0}}), 1.0).F;
  const double f13 = f_ratio(single_mode(dom, 256, {{1, 1.0}, {3, 0.7}}), 1.0).F;
  CHECK(f13 > f1);
  CHECK(f13 < f3);

  // common scaling of all data leaves F unchanged
  const auto loads = self_equilibrated_load(dom, 2, 1.0, 0.3, 0.1);
  const double a = f_ratio(sample_loop(loads, dom, 512), 1.0).F;
  const double b = f_ratio(sample_loop(loads.scaled(17.0), dom, 512), 1.0).F;
  CHECK(std::abs(a - b) <= 1e-12 * a);

  auto bad = single_mode(dom, 64, {{1, 1.0}});
  bad.s[5] += 0.01;
  CHECK_THROWS_AS(f_ratio(bad, 1.0), Error);
}

TEST_CASE("calibration rejects degenerate sweeps") {
  WorkReport r;
  r.W0 = 1.0;
  r.W = 0.95;
  r.gap = 0.05;
  size_estimators(r, 1.0, stiffer());
  CHECK_THROWS_AS(calibrate({{0.1, r}}), Error);
  CHECK_THROWS_AS(calibrate({{0.1, r}, {0.1, r}, {0.1, r}}), Error);

  std::vector<CalibrationPoint> pts;
  for (double a : {0.01, 0.02, 0.04, 0.08}) {
    WorkReport w;
    w.W0 = 1.0;
    w.gap = 0.5 * a;
    w.W = 1.0 - w.gap;
    size_estimators(w, 1.0, stiffer());
    pts.push_back({a, w});
  }
  const auto c = calibrate(pts);
  CHECK(c.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.C_up_fat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.C_low > 0.0);
  CHECK(c.C_low <= c.C_up_fat);
}

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace nanoplate {

using Vec2 = Eigen::Vector2d;

enum class Edge : int { Bottom = 0, Right = 1, Top = 2, Left = 3 };

/// Point of the counterclockwise arclength chart of a rectangle boundary.
struct BoundaryPoint {
  Vec2 x;
  Vec2 n;    // outward unit normal
  Vec2 tau;  // e3 x n
  Edge edge = Edge::Bottom;
};

/// Axis-aligned rectangular midsurface.
struct RectDomain {
  Vec2 origin = Vec2::Zero();  // lower-left corner
  double width = 1.0;
  double height = 1.0;
  double r0 = 1.0;
  double M1 = 1.0;

  [[nodiscard]] double area() const { return width * height; }
  [[nodiscard]] double perimeter() const { return 2.0 * (width + height); }
  [[nodiscard]] double diameter() const { return std::hypot(width, height); }
  [[nodiscard]] Vec2 upper() const { return origin + Vec2(width, height); }
  [[nodiscard]] bool contains(const Vec2& x, double tol = 0.0) const;
  /// Distance to the boundary for interior points (negative outside).
  [[nodiscard]] double distance_to_boundary(const Vec2& x) const;
  /// True when |Omega| <= M1 r0^2.
  [[nodiscard]] bool area_bound_holds() const { return area() <= M1 * r0 * r0; }

  void validate() const;
};

/// Counterclockwise arclength chart starting at the lower-left corner along the bottom edge.
class BoundaryChart {
 public:
  explicit BoundaryChart(const RectDomain& domain);

  [[nodiscard]] double perimeter() const { return domain_.perimeter(); }
  [[nodiscard]] double edge_start(Edge e) const;
  [[nodiscard]] double edge_length(Edge e) const;
  /// Point at arclength s on a given edge (one-sided at corners).
  [[nodiscard]] BoundaryPoint at(Edge e, double s) const;
  /// Point at arclength s in [0, perimeter]; at a corner the edge starting there is used.
  [[nodiscard]] BoundaryPoint at(double s) const;

 private:
  RectDomain domain_;
};

struct Disk {
  Vec2 center;
  double radius = 0.0;
};

struct AxisRect {
  Vec2 center;
  Vec2 half;  // half-widths
};

/// Simple polygon (either orientation accepted; stored counterclockwise).
struct Polygon {
  std::vector<Vec2> vertices;
};

using Primitive = std::variant<Disk, AxisRect, Polygon>;

/// Signed distance of a single primitive (negative inside).
double signed_distance(const Primitive& p, const Vec2& x);
/// Closed-set membership of a single primitive.
bool primitive_contains(const Primitive& p, const Vec2& x);
double primitive_area(const Primitive& p);

struct BoundingBox {
  Vec2 lo;
  Vec2 hi;
};

/// Inclusion D as a union of primitives. Boundary points belong to D.
class InclusionSet {
 public:
  InclusionSet() = default;
  explicit InclusionSet(std::vector<Primitive> primitives, double d0 = 0.0);

  [[nodiscard]] const std::vector<Primitive>& primitives() const { return primitives_; }
  [[nodiscard]] double d0() const { return d0_; }
  [[nodiscard]] bool empty() const { return primitives_.empty(); }

  [[nodiscard]] bool contains(const Vec2& x) const;
  /// min over primitives of the signed distance. Exact outside D; inside, |value| never exceeds the depth.
  [[nodiscard]] double signed_distance_bound(const Vec2& x) const;
  [[nodiscard]] std::optional<BoundingBox> bounding_box() const;
  /// Primitives are disks/rectangles separated by a positive gap.
  [[nodiscard]] bool analytic_pairwise_disjoint() const;
  /// dist(D, boundary of the domain) computed per primitive.
  [[nodiscard]] double distance_to_domain_boundary(const RectDomain& domain) const;

  /// Checks every primitive lies inside the domain and the d0 r0 clearance.
  void validate(const RectDomain& domain) const;

 private:
  std::vector<Primitive> primitives_;
  double d0_ = 0.0;
};

/// |D|. Exact: boundary-integral (Green) evaluation of the union for any overlap pattern.
double area(const InclusionSet& set);

/// Pixel mask of an eroded set.
struct RasterMask {
  Vec2 origin;  // lower-left corner of pixel (0, 0)
  double cell = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<unsigned char> inside;  // row-major, y outer

  [[nodiscard]] bool contains(const Vec2& x) const;
  [[nodiscard]] double area() const;
};

/// D_h = {x in D : dist(x, complement of D) > h}.
class ErodedSet {
 public:
  ErodedSet(InclusionSet source, double depth, std::variant<InclusionSet, RasterMask> representation);

  [[nodiscard]] double depth() const { return depth_; }
  [[nodiscard]] bool is_analytic() const { return std::holds_alternative<InclusionSet>(repr_); }
  /// Raster pixel size, 0 for analytic results.
  [[nodiscard]] double raster_cell() const;
  [[nodiscard]] const InclusionSet& source() const { return source_; }
  [[nodiscard]] const std::variant<InclusionSet, RasterMask>& representation() const { return repr_; }

  [[nodiscard]] bool contains(const Vec2& x) const;
  [[nodiscard]] double area() const;

 private:
  InclusionSet source_;
  double depth_ = 0.0;
  std::variant<InclusionSet, RasterMask> repr_;
};

/// Analytic shrink for separated disks/rectangles; otherwise exact Euclidean distance transform
/// on a raster with cell min(h/50, extent/256), capped at max_pixels total.
ErodedSet erode(const InclusionSet& set, double h, long max_pixels = 4'000'000);

struct FatnessResult {
  bool fat = false;
  double margin = 0.0;  // |D_{h1 r0}| / |D| - 1/2
  double area = 0.0;
  double eroded_area = 0.0;
  double h1 = 0.0;
};

FatnessResult fatness_check(const InclusionSet& set, double h1, double r0);

std::string describe(const Primitive& p);

}  // namespace nanoplate

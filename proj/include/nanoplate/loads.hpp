#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nanoplate/geometry.hpp"
#include "nanoplate/materials.hpp"

namespace nanoplate {

/// Shear V, moment Mn and high-order moment Mhn at a boundary point.
struct EdgeLoad {
  double V = 0.0;
  double Mn = 0.0;
  double Mhn = 0.0;
};

/// Composite Gauss rule along each edge.
struct BoundaryRule {
  int segments_per_edge = 64;
  int points = 10;
};

/// Neumann data along the boundary chart, plus an optional volume load (manufactured cases only).
class LoadSpec {
 public:
  using Density = std::function<EdgeLoad(const BoundaryPoint&, double s)>;
  using Volume = std::function<double(const Vec2&)>;

  LoadSpec() = default;
  LoadSpec(std::string name, Density boundary, Volume volume = {});

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] EdgeLoad at(const BoundaryPoint& p, double s) const;
  [[nodiscard]] bool has_volume() const { return static_cast<bool>(volume_); }
  [[nodiscard]] double volume_at(const Vec2& x) const { return volume_ ? volume_(x) : 0.0; }

  /// L2 boundary norm of the part removed to enforce compatibility (0 for presets).
  [[nodiscard]] double projection_magnitude() const { return projection_; }
  void set_projection_magnitude(double m) { projection_ = m; }

  [[nodiscard]] LoadSpec scaled(double c) const;

 private:
  std::string name_ = "zero";
  Density boundary_;
  Volume volume_;
  double projection_ = 0.0;
};

/// The three integrals that must vanish for solvability, with the data scales they are measured against.
struct CompatibilityResiduals {
  double force = 0.0;    // int V - int f
  double moment1 = 0.0;  // int V x1 + Mn n1 - int f x1
  double moment2 = 0.0;  // int V x2 + Mn n2 - int f x2
  double force_scale = 0.0;
  double moment_scale = 0.0;
  double tolerance = 1e-10;

  [[nodiscard]] double max_abs() const;
  [[nodiscard]] bool ok() const;
};

CompatibilityResiduals compatibility_residuals(const LoadSpec& loads, const RectDomain& domain,
                                               const BoundaryRule& rule = {}, double tolerance = 1e-10);

/// Throws IncompatibleLoads naming the first violated integral.
CompatibilityResiduals check_compatibility(const LoadSpec& loads, const RectDomain& domain,
                                           const BoundaryRule& rule = {}, double tolerance = 1e-10);

/// Visits every boundary quadrature node: f(point, s, weight).
void for_each_boundary_node(const RectDomain& domain, const BoundaryRule& rule,
                            const std::function<void(const BoundaryPoint&, double, double)>& f);

// Presets.

LoadSpec zero_load();

/// V = amplitude cos(2 pi mode s / perimeter) plus constant Mn = moment and Mhn = high_order, with a linear
/// Mn = c1 n1 + c2 n2 correction cancelling the two moment integrals.
LoadSpec self_equilibrated_load(const RectDomain& domain, int mode, double amplitude, double moment = 0.0,
                                double high_order = 0.0);

/// Constant Mn = m. For constant coefficients the solution is a paraboloid.
LoadSpec pure_moment_load(double m);

/// Constant Mhn.
LoadSpec high_order_moment_load(double mh);

/// Data for u* = cos(k x1') cos(k x2') on a square of side L (k = pi/L, primes relative to the origin).
LoadSpec manufactured_cosine_load(const RectDomain& domain, const BendingOperators& ops);

struct LoadSample {
  int edge = 0;
  double s = 0.0;  // arclength measured along the edge in chart direction
  double V = 0.0;
  double Mn = 0.0;
  double Mhn = 0.0;
};

/// Piecewise-linear table data. V is corrected by its best L2 fit from span{1, x1, x2} so the
/// compatibility integrals vanish; the fit's norm is stored as the projection magnitude.
LoadSpec table_load(const RectDomain& domain, std::vector<LoadSample> samples, const BoundaryRule& rule = {});

/// Reads "edge,s,V,Mn,Mhn" rows (header line optional).
std::vector<LoadSample> read_load_table(const std::string& path);

/// Uniform loop sampling at s_k = k P / n.
struct LoopSamples {
  double perimeter = 0.0;
  std::vector<double> s;
  std::vector<double> V;
  std::vector<double> Mn;
  std::vector<double> Mhn;
};

LoopSamples sample_loop(const LoadSpec& loads, const RectDomain& domain, int n);

}  // namespace nanoplate

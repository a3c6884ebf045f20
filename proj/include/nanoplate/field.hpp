#pragma once

#include <vector>

#include "nanoplate/spline_space.hpp"

namespace nanoplate {

/// Anything that can report derivatives up to some order at a point.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  [[nodiscard]] virtual Derivatives eval(const Vec2& x, int order) const = 0;
  [[nodiscard]] virtual int max_order() const = 0;
};

/// sum c_ab x^a y^b, expanded about `origin`.
class PolynomialField final : public ScalarField {
 public:
  struct Term {
    int a = 0;
    int b = 0;
    double c = 0.0;
  };

  explicit PolynomialField(std::vector<Term> terms, Vec2 origin = Vec2::Zero());

  [[nodiscard]] Derivatives eval(const Vec2& x, int order) const override;
  [[nodiscard]] int max_order() const override { return 4; }

  /// Adds an affine function.
  [[nodiscard]] PolynomialField plus_affine(double c0, double c1, double c2) const;
  [[nodiscard]] PolynomialField scaled(double s) const;

 private:
  std::vector<Term> terms_;
  Vec2 origin_;
};

}  // namespace nanoplate

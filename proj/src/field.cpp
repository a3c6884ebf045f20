#include "nanoplate/field.hpp"

#include <cmath>

namespace nanoplate {

namespace {

// d^k/dz^k z^n evaluated at z.
double monomial_derivative(int n, int k, double z) {
  if (k > n) return 0.0;
  double f = 1.0;
  for (int i = 0; i < k; ++i) f *= (n - i);
  return f * std::pow(z, n - k);
}

}  // namespace

PolynomialField::PolynomialField(std::vector<Term> terms, Vec2 origin) : terms_(std::move(terms)), origin_(origin) {}

Derivatives PolynomialField::eval(const Vec2& x, int order) const {
  const Vec2 z = x - origin_;
  Derivatives out;
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; i + j <= order; ++j) {
      double v = 0.0;
      for (const auto& t : terms_) v += t.c * monomial_derivative(t.a, i, z.x()) * monomial_derivative(t.b, j, z.y());
      out.d[i][j] = v;
    }
  }
  return out;
}

PolynomialField PolynomialField::plus_affine(double c0, double c1, double c2) const {
  auto terms = terms_;
  terms.push_back({0, 0, c0});
  terms.push_back({1, 0, c1});
  terms.push_back({0, 1, c2});
  return PolynomialField(std::move(terms), origin_);
}

PolynomialField PolynomialField::scaled(double s) const {
  auto terms = terms_;
  for (auto& t : terms) t.c *= s;
  return PolynomialField(std::move(terms), origin_);
}

}  // namespace nanoplate

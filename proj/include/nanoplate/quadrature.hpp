#pragma once

#include <vector>

namespace nanoplate {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule (n >= 1). Thread safe.
const GaussRule& gauss_legendre(int n);

/// Maps the rule onto [a, b]; returns (node, weight) pairs through the callback.
template <class F>
void for_each_gauss_point(const GaussRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    f(mid + half * rule.nodes[q], half * rule.weights[q]);
  }
}

}  // namespace nanoplate

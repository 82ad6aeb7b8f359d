#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sbdrift::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule; thread safe.
const Rule& gauss_legendre(int n);

/// Composite rule: `panels` equal panels on [a, b], each with an n-point rule.
Rule composite(double a, double b, int panels, int n);

/// Integral of f over [a, b] with one n-point Gauss-Legendre panel.
/// `f` returns std::array<double, K>.
template <std::size_t K, class F>
std::array<double, K> panel_integral(const F& f, double a, double b, const Rule& rule) {
  std::array<double, K> acc{};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const auto v = f(mid + half * rule.nodes[i]);
    for (std::size_t k = 0; k < K; ++k) acc[k] += rule.weights[i] * v[k];
  }
  for (auto& x : acc) x *= half;
  return acc;
}

/// Adaptive Gauss-Legendre: a panel is accepted when splitting it in half
/// changes every component by less than tol * (b - a) / (b0 - a0).
template <std::size_t K, class F>
std::array<double, K> adaptive(const F& f, double a, double b, int order, double tol,
                               int max_depth = 40) {
  const Rule& rule = gauss_legendre(order);
  const double total_width = b - a;
  std::array<double, K> result{};

  struct Panel {
    double lo, hi;
    std::array<double, K> whole;
    int depth;
  };
  std::vector<Panel> stack;
  stack.push_back({a, b, panel_integral<K>(f, a, b, rule), 0});
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.lo + p.hi);
    const auto left = panel_integral<K>(f, p.lo, mid, rule);
    const auto right = panel_integral<K>(f, mid, p.hi, rule);
    const double local_tol = tol * (p.hi - p.lo) / total_width;
    bool converged = true;
    for (std::size_t k = 0; k < K; ++k) {
      if (std::abs(left[k] + right[k] - p.whole[k]) > local_tol) converged = false;
    }
    if (converged || p.depth >= max_depth) {
      for (std::size_t k = 0; k < K; ++k) result[k] += left[k] + right[k];
    } else {
      // right pushed first so panels are summed left to right
      stack.push_back({mid, p.hi, right, p.depth + 1});
      stack.push_back({p.lo, mid, left, p.depth + 1});
    }
  }
  return result;
}

}  // namespace sbdrift::quadrature

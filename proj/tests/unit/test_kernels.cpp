#include "doctest.h"

#include "sbdrift/kernels.hpp"
#include "sbdrift/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

using namespace sbdrift;
using namespace sbdrift::kernels;

namespace {

double eval1(double z) {
  const std::array<double, 1> v{z};
  return eval_kernel({1}, v);
}

double eval2(double a, double b) {
  const std::array<double, 2> v{a, b};
  return eval_kernel({2}, v);
}

// Tensor Gauss-Legendre integral of g over [-r, r]^d; the kernel is a
// polynomial on its support, so a 4-point rule on [-1, 1] is exact.
template <class G>
double integrate(int dim, double r, const G& g) {
  const auto rule = quadrature::composite(-r, r, 1, 4);
  double total = 0.0;
  if (dim == 1) {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) total += rule.weights[i] * g(rule.nodes[i], 0.0);
  } else {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        total += rule.weights[i] * rule.weights[j] * g(rule.nodes[i], rule.nodes[j]);
      }
    }
  }
  return total;
}

}  // namespace

TEST_CASE("kernel values") {
  CHECK(eval1(0.0) == doctest::Approx(0.75));
  CHECK(eval1(1.0) == 0.0);
  CHECK(eval1(-1.0) == 0.0);
  CHECK(eval1(1.5) == 0.0);
  CHECK(eval2(0.0, 0.0) == doctest::Approx(0.5625));
  CHECK(eval2(0.3, 1.2) == 0.0);
}

TEST_CASE("scaled kernel values") {
  const std::array<double, 1> zero{0.0};
  const std::array<double, 1> out{0.6};
  const std::array<double, 2> origin{0.0, 0.0};
  CHECK(eval_scaled({1}, zero, 0.5) == doctest::Approx(1.5));
  CHECK(eval_scaled({1}, out, 0.5) == 0.0);
  CHECK(eval_scaled({2}, origin, 2.0) == doctest::Approx(0.140625));
}

TEST_CASE("invalid arguments") {
  const std::array<double, 2> z2{0.0, 0.0};
  const std::array<double, 1> z1{0.0};
  CHECK_THROWS_AS(eval_kernel({1}, z2), std::invalid_argument);
  CHECK_THROWS_AS(eval_scaled({1}, z1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_scaled({1}, z1, -1.0), std::invalid_argument);
}

TEST_CASE("kernel constants") {
  const auto c1 = kernel_constants({1});
  const auto c2 = kernel_constants({2});
  CHECK(c1.l2_norm_sq == doctest::Approx(0.6));
  CHECK(c2.l2_norm_sq == doctest::Approx(0.36));
  CHECK(c1.sup_norm == doctest::Approx(0.75));
  CHECK(c2.sup_norm == doctest::Approx(0.5625));
  CHECK(c1.support_radius == 1.0);

  // R(K) against quadrature of K^2.
  const double r1 = integrate(1, 1.0, [](double a, double) { return eval1(a) * eval1(a); });
  const double r2 = integrate(2, 1.0, [](double a, double b) { return eval2(a, b) * eval2(a, b); });
  CHECK(std::abs(r1 - c1.l2_norm_sq) < 1e-12);
  CHECK(std::abs(r2 - c2.l2_norm_sq) < 1e-12);
}

TEST_CASE("unit mass") {
  CHECK(std::abs(integrate(1, 1.0, [](double a, double) { return eval1(a); }) - 1.0) < 1e-10);
  CHECK(std::abs(integrate(2, 1.0, [](double a, double b) { return eval2(a, b); }) - 1.0) < 1e-10);
  for (double h : {0.1, 1.2}) {
    const double m1 = integrate(1, h, [h](double a, double) {
      const std::array<double, 1> z{a};
      return eval_scaled({1}, z, h);
    });
    const double m2 = integrate(2, h, [h](double a, double b) {
      const std::array<double, 2> z{a, b};
      return eval_scaled({2}, z, h);
    });
    CHECK(std::abs(m1 - 1.0) < 1e-10);
    CHECK(std::abs(m2 - 1.0) < 1e-10);
  }
}

TEST_CASE("nonnegative, symmetric, compact support") {
  for (int i = -300; i <= 300; ++i) {
    const double a = i / 100.0;
    CHECK(eval1(a) >= 0.0);
    CHECK(eval1(a) == eval1(-a));
    if (std::abs(a) > 1.0) CHECK(eval1(a) == 0.0);
    for (int j = -30; j <= 30; j += 3) {
      const double b = j / 10.0;
      CHECK(eval2(a, b) == eval2(-a, -b));
      if (std::abs(a) > 1.0 || std::abs(b) > 1.0) CHECK(eval2(a, b) == 0.0);
    }
  }
}

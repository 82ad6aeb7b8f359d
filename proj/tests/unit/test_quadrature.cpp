#include "doctest.h"

#include "sbdrift/quadrature.hpp"

#include <array>
#include <cmath>

using namespace sbdrift;

TEST_CASE("Gauss-Legendre rule") {
  for (int n : {2, 3, 5, 16, 64}) {
    const auto& r = quadrature::gauss_legendre(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    double w = 0.0;
    for (double x : r.weights) w += x;
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    // Exact for polynomials of degree 2n - 1.
    double moment = 0.0;
    for (int i = 0; i < n; ++i) moment += r.weights[i] * std::pow(r.nodes[i], 2 * n - 2);
    CHECK(moment == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-12));
  }
  const auto& r2 = quadrature::gauss_legendre(2);
  CHECK(std::abs(r2.nodes[0]) == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("composite rule") {
  const auto r = quadrature::composite(0.0, M_PI, 10, 8);
  double total = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) total += r.weights[i] * std::sin(r.nodes[i]);
  CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("adaptive rule") {
  // Sharp Gaussian bump: integral of exp(-x^2 / (2 s^2)) over R.
  const double s = 0.01;
  const auto v = quadrature::adaptive<2>(
      [s](double x) {
        const double g = std::exp(-0.5 * x * x / (s * s));
        return std::array<double, 2>{g, x * x * g};
      },
      -1.0, 1.0, 16, 1e-13);
  CHECK(v[0] == doctest::Approx(s * std::sqrt(2.0 * M_PI)).epsilon(1e-11));
  CHECK(v[1] == doctest::Approx(s * s * s * std::sqrt(2.0 * M_PI)).epsilon(1e-9));
}

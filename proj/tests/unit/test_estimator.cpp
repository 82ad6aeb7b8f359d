#include "doctest.h"

#include "sbdrift/estimator.hpp"
#include "sbdrift/truth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

using namespace sbdrift;
using models::Testbed;

namespace {

const truth::IntervalSpec kInterval{};

models::SampleSet single_pair(double xs, double xu) {
  models::SampleSet s;
  s.dim = 1;
  s.push_back(scalar_vec(xs), scalar_vec(xu));
  return s;
}

models::SampleSet gg1_sample(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  return models::sample_dataset(models::make_law(Testbed::GG1), m, rng);
}

}  // namespace

TEST_CASE("kernel density estimate") {
  const auto one = single_pair(0.3, 1.0);
  CHECK(estimator::estimate_f(one, scalar_vec(0.3), 0.5) == doctest::Approx(1.5));
  CHECK(estimator::estimate_f(one, scalar_vec(1.0), 0.5) == 0.0);
  CHECK_THROWS_AS(estimator::estimate_f(models::SampleSet{}, scalar_vec(0.0), 0.5), std::invalid_argument);

  const auto big = gg1_sample(100000, 3);
  CHECK(std::abs(estimator::estimate_f(big, scalar_vec(0.0), 0.2) - 0.4000223) < 0.02);
}

TEST_CASE("weighted sums") {
  const truth::Query q{0.6, scalar_vec(0.2), scalar_vec(0.3)};
  const auto one = single_pair(0.3, 1.0);
  const double f = truth::sb_weight(kInterval, q.t, q.xi, q.x, scalar_vec(1.0));
  CHECK(estimator::estimate_g1(one, kInterval, q, 0.5) == doctest::Approx(f * 1.5));
  CHECK(estimator::estimate_g2(one, kInterval, q, 0.5)(0) / estimator::estimate_g1(one, kInterval, q, 0.5) ==
        doctest::Approx(1.0).epsilon(1e-15));

  const auto law = models::make_law(Testbed::GG1);
  const auto big = gg1_sample(100000, 4);
  const truth::Query qi{0.6, scalar_vec(0.2), scalar_vec(0.0)};
  const auto m = truth::population_moments(law, kInterval, qi);
  const double f0 = law.marginal_density(qi.xi);
  CHECK(estimator::estimate_g1(big, kInterval, qi, 0.2) == doctest::Approx(f0 * m.dstar).epsilon(0.03));
}

TEST_CASE("single-pair drift identity") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.5, 2.5), t(0.2, 0.95), h(0.05, 1.5);
  int exact = 0;
  for (int i = 0; i < 500; ++i) {
    const double xs = u(rng), xu = u(rng);
    const truth::Query q{t(rng), scalar_vec(u(rng)), scalar_vec(xs)};
    const auto one = single_pair(xs, xu);
    const double h1 = h(rng), h2 = h(rng);
    const auto est = estimator::estimate_drift(one, kInterval, q, h1, h2);
    REQUIRE_FALSE(est.floor_triggered);
    const double expected = (xu - q.x(0)) / kInterval.delta_at(q.t);
    exact += est.value(0) == expected ? 1 : 0;
  }
  CHECK(exact == 500);
}

TEST_CASE("floor rule") {
  const auto one = single_pair(0.0, 1.0);
  const truth::Query q{0.6, scalar_vec(0.2), scalar_vec(2.0)};
  const auto est = estimator::estimate_drift(one, kInterval, q, 0.5, 0.5, {0.01, 0.001});
  CHECK(est.floor_triggered);
  CHECK(est.value(0) == 0.0);

  // Floors hold whenever the estimate is accepted.
  const estimator::Floors floors{0.05, 0.05};
  const auto sample = gg1_sample(400, 5);
  int accepted = 0, rejected = 0;
  for (int k = 0; k < 60; ++k) {
    const double xi = -2.9 + 0.1 * k;
    for (double h : {0.05, 0.2}) {
      const auto e = estimator::estimate_drift(sample, kInterval, {0.6, scalar_vec(0.5), scalar_vec(xi)}, h, h, floors);
      if (e.floor_triggered) {
        ++rejected;
        CHECK(e.value(0) == 0.0);
      } else {
        ++accepted;
        CHECK(e.fhat1 >= floors.f_min / 2);
        CHECK(e.fhat2 >= floors.f_min / 2);
        CHECK(e.dhat >= floors.d_min / 2);
      }
    }
  }
  CHECK(accepted > 0);
  CHECK(rejected > 0);
}

TEST_CASE("grid evaluation") {
  const auto sample = gg1_sample(2000, 6);
  const Vec xi = scalar_vec(0.0);
  std::vector<Vec> grid;
  for (int i = 0; i < 41; ++i) grid.push_back(scalar_vec(-2.0 + 0.1 * i));
  const estimator::Floors floors{0.027, 0.003};
  const auto batch = estimator::estimate_drift_grid(sample, kInterval, 0.6, xi, grid, 0.3, floors);
  REQUIRE(batch.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto single = estimator::estimate_drift(sample, kInterval, {0.6, grid[i], xi}, 0.3, 0.3, floors);
    CHECK(single.value(0) == batch[i].value(0));
    CHECK(single.dhat == batch[i].dhat);
    CHECK(single.floor_triggered == batch[i].floor_triggered);
  }
  const std::vector<Vec> one{grid[7]};
  CHECK(estimator::estimate_drift_grid(sample, kInterval, 0.6, xi, one, 0.3, floors)[0].value(0) == batch[7].value(0));

  std::vector<std::size_t> perm(grid.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  std::vector<Vec> shuffled;
  for (auto p : perm) shuffled.push_back(grid[p]);
  const auto permuted = estimator::estimate_drift_grid(sample, kInterval, 0.6, xi, shuffled, 0.3, floors);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(permuted[i].value(0) == batch[perm[i]].value(0));
}

TEST_CASE("translation equivariance of the density estimate") {
  // Dyadic data so shifted differences are exact.
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> cell(-3 << 16, 3 << 16);
  models::SampleSet a, b;
  a.dim = b.dim = 1;
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(static_cast<double>(cell(rng)), -16);
    a.push_back(scalar_vec(v), scalar_vec(0.0));
    b.push_back(scalar_vec(v + 2.0), scalar_vec(0.0));
  }
  for (double xi : {-1.0, 0.0, 0.25, 1.5}) {
    CHECK(estimator::estimate_f(a, scalar_vec(xi), 0.375) == estimator::estimate_f(b, scalar_vec(xi + 2.0), 0.375));
  }
}

TEST_CASE("GG1 estimate is accurate at a moderate bandwidth") {
  const auto law = models::make_law(Testbed::GG1);
  const truth::Query q{0.6, scalar_vec(0.2), scalar_vec(0.0)};
  const double a_star = truth::true_drift(law, kInterval, q)(0);
  int close = 0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(1000 + s);
    const auto sample = models::sample_dataset(law, 8000, rng);
    const auto est = estimator::estimate_drift(sample, kInterval, q, 0.24, 0.24, {0.027, 0.003});
    close += std::abs(est.value(0) - a_star) <= 0.5 ? 1 : 0;
  }
  CHECK(close >= 0.95 * seeds);
}

TEST_CASE("ratio-transfer bound") {
  SUBCASE("exact blocks give zero") {
    estimator::RatioTransferTerms t{0.4, 0.4, 0.3, scalar_vec(0.12), 0.4, 0.3, scalar_vec(0.12), scalar_vec(0.4),
                                    0.1, 0.2, 0.4};
    const auto b = estimator::ratio_transfer_bound(t);
    REQUIRE(b);
    CHECK(*b == 0.0);
  }
  SUBCASE("monotone in block errors") {
    estimator::RatioTransferTerms t{0.41, 0.39, 0.31, scalar_vec(0.13), 0.4, 0.3, scalar_vec(0.12),
                                    scalar_vec(0.4), 0.1, 0.2, 0.4};
    const double base = *estimator::ratio_transfer_bound(t);
    auto grow = t;
    grow.fhat1 = 0.42;
    CHECK(*estimator::ratio_transfer_bound(grow) >= base);
    grow = t;
    grow.ghat2(0) = 0.14;
    CHECK(*estimator::ratio_transfer_bound(grow) >= base);
    grow = t;
    grow.ghat1 = 0.32;
    CHECK(*estimator::ratio_transfer_bound(grow) >= base);
    grow = t;
    grow.fhat2 = 0.38;
    CHECK(*estimator::ratio_transfer_bound(grow) >= base);
  }
  SUBCASE("off the event") {
    estimator::RatioTransferTerms t{0.01, 0.4, 0.3, scalar_vec(0.12), 0.4, 0.3, scalar_vec(0.12), scalar_vec(0.4),
                                    0.1, 0.2, 0.4};
    CHECK_FALSE(estimator::ratio_transfer_bound(t));
  }
  SUBCASE("random GG1 instances") {
    const auto law = models::make_law(Testbed::GG1);
    const estimator::Floors floors{0.5 * 5.413713e-2, 0.5 * 6.140077e-3};
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> t(0.2, 0.95), x(-2.0, 2.0), xi(-2.0, 2.0), h(0.05, 0.6);
    std::uniform_int_distribution<std::size_t> m(200, 4000);
    int on_event = 0, holds = 0;
    for (int trial = 0; trial < 1000 && on_event < 100; ++trial) {
      Rng srng(rng());
      const auto sample = models::sample_dataset(law, m(rng), srng);
      const truth::Query q{t(rng), scalar_vec(x(rng)), scalar_vec(xi(rng))};
      const double h1 = h(rng), h2 = h(rng);
      const double f = law.marginal_density(q.xi);
      const auto pm = truth::population_moments(law, kInterval, q);
      estimator::RatioTransferTerms terms{estimator::estimate_f(sample, q.xi, h1),
                                          estimator::estimate_f(sample, q.xi, h2),
                                          estimator::estimate_g1(sample, kInterval, q, h1),
                                          estimator::estimate_g2(sample, kInterval, q, h2),
                                          f,
                                          f * pm.dstar,
                                          f * pm.nstar,
                                          pm.nstar / pm.dstar,
                                          floors.f_min,
                                          floors.d_min,
                                          kInterval.delta_at(q.t)};
      const auto bound = estimator::ratio_transfer_bound(terms);
      if (!bound) continue;
      ++on_event;
      const auto est = estimator::estimate_drift(sample, kInterval, q, h1, h2, floors);
      const double err = std::abs(est.value(0) - truth::drift_from_moments(kInterval, q, pm)(0));
      holds += err <= *bound ? 1 : 0;
    }
    CHECK(on_event == 100);
    CHECK(holds == 100);
  }
}

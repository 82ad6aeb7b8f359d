#pragma once

#include "sbdrift/estimator.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sbdrift::inference {

/// Two-sided 95% normal critical value.
inline constexpr double kZ95 = 1.96;
/// Anderson-Darling 5% critical value of the composite normality test.
inline constexpr double kAndersonCritical5 = 0.75;

/// Plug-in asymptotic variance of sqrt(M h^d) (ahat - a*) at a d = 1 query
/// with diagonal bandwidth h. Returns nullopt when the floor event fails.
std::optional<double> plugin_variance(const models::SampleSet& sample,
                                      const truth::IntervalSpec& interval,
                                      const truth::Query& query, double h,
                                      const estimator::Floors& floors = {});

/// sqrt(M h^d) (a_hat - a_star) / sqrt(sigma_hat).
double standardized_stat(double a_hat, double a_star, double sigma_hat, std::size_t sample_size,
                         double h, int dim);

struct ConfidenceInterval {
  double lo;
  double hi;
  double a_hat;
  double sigma_hat;
  double scale;     // sqrt(M h^d)
  double critical;  // 1.96 at level 0.95

  /// |Z| <= critical; identical to a_star in [lo, hi] up to rounding at the endpoints.
  bool covers(double a_star) const;
};

ConfidenceInterval confidence_interval(double a_hat, double sigma_hat, std::size_t sample_size,
                                       double h, int dim, double level = 0.95);

struct CltRecord {
  std::size_t rep = 0;
  std::size_t sample_size = 0;
  double h = 0.0;
  double a_hat = 0.0;
  double a_star = 0.0;
  double sigma_hat = 0.0;
  double z = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool covered = false;
  bool applicable = true;  // false when the floor fails or sigma_hat <= 0
};

struct AndersonDarling {
  double statistic = 0.0;
  bool reject_5pct = false;
  bool clamped = false;       // some Phi(z) hit the [1e-300, 1 - 1e-16] clamp
  bool standardized = false;  // z was centred and scaled by its sample moments
};

enum class AdReference {
  Standardized,  // composite normality test; the 0.75 critical value applies
  Specified,     // raw z against N(0, 1)
};

/// A^2 of z against the normal family. Standardized mode falls back to the
/// raw values when n < 2 or the sample has zero spread.
AndersonDarling anderson_darling(std::span<const double> z,
                                 AdReference reference = AdReference::Standardized);

/// (Phi^{-1}((i - 0.5) / n), z_(i)) for the sorted sample.
std::vector<std::pair<double, double>> qq_data(std::span<const double> z);

double ols_slope(std::span<const double> xs, std::span<const double> ys);

/// Secant slope of log((log M / M)^{p(d)}) between M1 and M2, p(d) = 2 / (4 + d).
double theory_secant_slope(double m1, double m2, int dim);

double mean(std::span<const double> v);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> v);
double median(std::vector<double> v);

}  // namespace sbdrift::inference

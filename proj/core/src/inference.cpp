#include "sbdrift/inference.hpp"

#include "sbdrift/kernels.hpp"
#include "sbdrift/normal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbdrift::inference {

std::optional<double> plugin_variance(const models::SampleSet& sample,
                                      const truth::IntervalSpec& interval,
                                      const truth::Query& query, double h,
                                      const estimator::Floors& floors) {
  if (sample.dim != 1) throw std::invalid_argument("plug-in variance is implemented for d = 1");
  const auto est = estimator::estimate_drift(sample, interval, query, h, h, floors);
  if (est.floor_triggered) return std::nullopt;

  const auto window = estimator::kernel_window(sample, query.xi, h);
  const double dt = interval.delta_at(query.t);
  const double x = query.x(0);
  const double xi = query.xi(0);
  const double shift = x + dt * est.value(0);
  double sum_psi = 0.0;
  double sum_psi_sq = 0.0;
  for (std::size_t k = 0; k < window.index.size(); ++k) {
    const double y = sample.target[window.index[k]];
    const double f = std::exp(-(y - x) * (y - x) / (2.0 * dt) + (y - xi) * (y - xi) / (2.0 * interval.delta()));
    const double psi = (y - shift) * f;
    sum_psi += window.weight[k] * psi;
    sum_psi_sq += window.weight[k] * psi * psi;
  }
  // E-hat[phi | xi] = sum phi K / sum K.
  const double cond_mean = sum_psi / window.weight_sum;
  const double cond_second = sum_psi_sq / window.weight_sum;
  const double spread = std::max(0.0, cond_second - cond_mean * cond_mean);
  const double r_k = kernels::kernel_constants({1}).l2_norm_sq;
  return r_k / (est.fhat1 * dt * dt * est.dhat * est.dhat) * spread;
}

double standardized_stat(double a_hat, double a_star, double sigma_hat, std::size_t sample_size,
                         double h, int dim) {
  if (!(sigma_hat > 0.0)) throw std::domain_error("standardized statistic needs sigma_hat > 0");
  const double scale = std::sqrt(static_cast<double>(sample_size) * std::pow(h, dim));
  return scale * (a_hat - a_star) / std::sqrt(sigma_hat);
}

bool ConfidenceInterval::covers(double a_star) const {
  if (!(sigma_hat > 0.0)) return a_star == a_hat;
  return std::abs(scale * (a_hat - a_star) / std::sqrt(sigma_hat)) <= critical;
}

ConfidenceInterval confidence_interval(double a_hat, double sigma_hat, std::size_t sample_size,
                                       double h, int dim, double level) {
  if (!(sigma_hat >= 0.0)) throw std::invalid_argument("variance must be nonnegative");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  ConfidenceInterval ci{};
  ci.a_hat = a_hat;
  ci.sigma_hat = sigma_hat;
  ci.scale = std::sqrt(static_cast<double>(sample_size) * std::pow(h, dim));
  ci.critical = level == 0.95 ? kZ95 : normal::quantile(0.5 + 0.5 * level);
  const double half = ci.critical * std::sqrt(sigma_hat) / ci.scale;
  ci.lo = a_hat - half;
  ci.hi = a_hat + half;
  return ci;
}

AndersonDarling anderson_darling(std::span<const double> z, AdReference reference) {
  if (z.empty()) throw std::invalid_argument("Anderson-Darling needs at least one value");
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  AndersonDarling out;
  if (reference == AdReference::Standardized && n >= 2) {
    const double m = mean(sorted);
    const double sd = std::sqrt(sample_variance(sorted));
    if (sd > 0.0) {
      for (double& v : sorted) v = (v - m) / sd;
      out.standardized = true;
    }
  }
  auto clamp = [&](double p) {
    if (p < 1e-300 || p > 1.0 - 1e-16) {
      out.clamped = true;
      return std::clamp(p, 1e-300, 1.0 - 1e-16);
    }
    return p;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lower = clamp(normal::cdf(sorted[i]));
    // 1 - Phi(z) computed as Phi(-z) to keep the upper tail.
    const double upper = clamp(normal::cdf(-sorted[n - 1 - i]));
    sum += (2.0 * static_cast<double>(i + 1) - 1.0) * (std::log(lower) + std::log(upper));
  }
  const double nd = static_cast<double>(n);
  out.statistic = -nd - sum / nd;
  out.reject_5pct = out.statistic > kAndersonCritical5;
  return out;
}

std::vector<std::pair<double, double>> qq_data(std::span<const double> z) {
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.emplace_back(normal::quantile((static_cast<double>(i) + 0.5) / n), sorted[i]);
  }
  return out;
}

double ols_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("OLS needs aligned data");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("OLS needs at least two distinct x values");
  return sxy / sxx;
}

double theory_secant_slope(double m1, double m2, int dim) {
  if (!(m1 > 1.0 && m2 > 1.0)) throw std::invalid_argument("secant slope needs M1, M2 > 1");
  if (m1 == m2) throw std::invalid_argument("secant slope needs M1 != M2");
  const double p = 2.0 / (4.0 + dim);
  return -p + p * std::log(std::log(m2) / std::log(m1)) / std::log(m2 / m1);
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty data");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("variance needs at least two values");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty data");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace sbdrift::inference

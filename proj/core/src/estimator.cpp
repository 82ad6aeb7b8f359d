#include "sbdrift/estimator.hpp"

#include "sbdrift/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace sbdrift::estimator {

namespace {

void check_sample(const SampleSet& sample, const Vec& xi, double h) {
  if (sample.size() == 0) throw std::invalid_argument("empty sample");
  if (xi.size() != sample.dim) throw std::invalid_argument("conditioning point dimension mismatch");
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
}

// F(t, xi, x, X_u) for every window member, in window order.
void sb_weights(const SampleSet& sample, const KernelWindow& window, const IntervalSpec& interval,
                double t, const Vec& xi, const Vec& x, std::vector<double>& out) {
  if (!(t < interval.u)) throw std::invalid_argument("query time must satisfy t < u");
  const int d = sample.dim;
  const double inv_two_dt = 1.0 / (2.0 * interval.delta_at(t));
  const double inv_two_delta = 1.0 / (2.0 * interval.delta());
  const double* xu = sample.target.data();
  out.resize(window.index.size());
  for (std::size_t k = 0; k < window.index.size(); ++k) {
    const double* y = xu + window.index[k] * d;
    double exponent = 0.0;
    for (int i = 0; i < d; ++i) {
      exponent += -(y[i] - x(i)) * (y[i] - x(i)) * inv_two_dt + (y[i] - xi(i)) * (y[i] - xi(i)) * inv_two_delta;
    }
    out[k] = std::exp(exponent);
  }
}

// Dhat = sum F K_h1 / sum K_h1 and Nhat / Dhat = sum X_u (F K_h2 / sum K_h2) / Dhat,
// the normalized form of ghat_j / fhat_j.
DriftEstimate combine(const SampleSet& sample, const KernelWindow& w1, const std::vector<double>& f1,
                      const KernelWindow& w2, const std::vector<double>& f2,
                      const IntervalSpec& interval, const Query& query, const Floors& floors) {
  const int d = sample.dim;
  DriftEstimate est;
  est.value = Vec::Zero(d);
  est.fhat1 = w1.fhat();
  est.fhat2 = w2.fhat();
  est.floor_triggered = !(est.fhat1 > 0.0) || !(est.fhat2 > 0.0);
  if (!est.floor_triggered) {
    for (std::size_t k = 0; k < f1.size(); ++k) est.dhat += f1[k] * w1.share[k];
    est.floor_triggered = !(est.dhat > 0.0) || est.fhat1 < 0.5 * floors.f_min ||
                          est.fhat2 < 0.5 * floors.f_min || est.dhat < 0.5 * floors.d_min;
  }
  if (est.floor_triggered) return est;
  const double* xu = sample.target.data();
  Vec q = Vec::Zero(d);
  for (std::size_t k = 0; k < f2.size(); ++k) {
    const double omega = f2[k] * w2.share[k] / est.dhat;
    const double* y = xu + w2.index[k] * d;
    for (int i = 0; i < d; ++i) q(i) += y[i] * omega;
  }
  est.value = (q - query.x) / interval.delta_at(query.t);
  return est;
}

}  // namespace

KernelWindow kernel_window(const SampleSet& sample, const Vec& xi, double h) {
  check_sample(sample, xi, h);
  KernelWindow w;
  w.h = h;
  w.sample_count = sample.size();
  const int d = sample.dim;
  const double* xs = sample.source.data();
  for (std::size_t m = 0; m < w.sample_count; ++m) {
    double k = 1.0;
    for (int i = 0; i < d; ++i) k *= kernels::epanechnikov((xs[m * d + i] - xi(i)) / h) / h;
    if (k > 0.0) {
      w.index.push_back(m);
      w.weight.push_back(k);
      w.weight_sum += k;
    }
  }
  w.share.reserve(w.weight.size());
  for (double k : w.weight) w.share.push_back(k / w.weight_sum);
  return w;
}

WeightedSums weighted_sums(const SampleSet& sample, const KernelWindow& window,
                           const IntervalSpec& interval, double t, const Vec& xi, const Vec& x) {
  if (!(t < interval.u)) throw std::invalid_argument("query time must satisfy t < u");
  const int d = sample.dim;
  const double inv_two_dt = 1.0 / (2.0 * interval.delta_at(t));
  const double inv_two_delta = 1.0 / (2.0 * interval.delta());
  const double* xu = sample.target.data();
  WeightedSums sums{0.0, Vec::Zero(d)};
  if (d == 1) {
    const double xv = x(0);
    const double xiv = xi(0);
    double acc = 0.0;
    double acc_y = 0.0;
    for (std::size_t k = 0; k < window.index.size(); ++k) {
      const double y = xu[window.index[k]];
      const double f = std::exp(-(y - xv) * (y - xv) * inv_two_dt + (y - xiv) * (y - xiv) * inv_two_delta);
      const double w = f * window.weight[k];
      acc += w;
      acc_y += y * w;
    }
    sums.weight = acc;
    sums.target(0) = acc_y;
    return sums;
  }
  for (std::size_t k = 0; k < window.index.size(); ++k) {
    const double* y = xu + window.index[k] * d;
    double exponent = 0.0;
    for (int i = 0; i < d; ++i) {
      exponent += -(y[i] - x(i)) * (y[i] - x(i)) * inv_two_dt + (y[i] - xi(i)) * (y[i] - xi(i)) * inv_two_delta;
    }
    const double w = std::exp(exponent) * window.weight[k];
    sums.weight += w;
    for (int i = 0; i < d; ++i) sums.target(i) += y[i] * w;
  }
  return sums;
}

double estimate_f(const SampleSet& sample, const Vec& xi, double h) {
  return kernel_window(sample, xi, h).fhat();
}

double estimate_g1(const SampleSet& sample, const IntervalSpec& interval, const Query& query, double h) {
  const auto w = kernel_window(sample, query.xi, h);
  return weighted_sums(sample, w, interval, query.t, query.xi, query.x).weight /
         static_cast<double>(sample.size());
}

Vec estimate_g2(const SampleSet& sample, const IntervalSpec& interval, const Query& query, double h) {
  const auto w = kernel_window(sample, query.xi, h);
  return weighted_sums(sample, w, interval, query.t, query.xi, query.x).target /
         static_cast<double>(sample.size());
}

DriftEstimate estimate_drift(const SampleSet& sample, const IntervalSpec& interval,
                             const Query& query, double h1, double h2, const Floors& floors) {
  if (query.x.size() != sample.dim) throw std::invalid_argument("query dimension mismatch");
  const auto w1 = kernel_window(sample, query.xi, h1);
  std::vector<double> f1;
  sb_weights(sample, w1, interval, query.t, query.xi, query.x, f1);
  if (h2 == h1) return combine(sample, w1, f1, w1, f1, interval, query, floors);
  const auto w2 = kernel_window(sample, query.xi, h2);
  std::vector<double> f2;
  sb_weights(sample, w2, interval, query.t, query.xi, query.x, f2);
  return combine(sample, w1, f1, w2, f2, interval, query, floors);
}

std::vector<DriftEstimate> estimate_drift_grid(const SampleSet& sample,
                                               const IntervalSpec& interval, double t,
                                               const Vec& xi, const std::vector<Vec>& xgrid,
                                               double h, const Floors& floors) {
  const auto window = kernel_window(sample, xi, h);
  std::vector<DriftEstimate> out;
  out.reserve(xgrid.size());
  std::vector<double> f;
  for (const Vec& x : xgrid) {
    if (x.size() != sample.dim) throw std::invalid_argument("grid point dimension mismatch");
    sb_weights(sample, window, interval, t, xi, x, f);
    out.push_back(combine(sample, window, f, window, f, interval, {t, x, xi}, floors));
  }
  return out;
}

std::optional<double> ratio_transfer_bound(const RatioTransferTerms& r) {
  if (!(r.f_min > 0.0) || !(r.d_min > 0.0) || !(r.delta_t > 0.0)) {
    throw std::invalid_argument("ratio transfer needs positive floors and time-to-go");
  }
  const double dhat = r.fhat1 > 0.0 ? r.ghat1 / r.fhat1 : 0.0;
  const bool on_event = r.fhat1 >= 0.5 * r.f_min && r.fhat2 >= 0.5 * r.f_min &&
                        dhat >= 0.5 * r.d_min && r.f >= r.f_min && r.g1 / r.f >= r.d_min;
  if (!on_event) return std::nullopt;
  const double f_min_sq = r.f_min * r.f_min;
  const double numerator_block =
      (r.f * (r.ghat2 - r.g2).norm() + r.g2.norm() * std::abs(r.fhat2 - r.f)) / f_min_sq;
  const double denominator_block =
      (r.f * std::abs(r.ghat1 - r.g1) + std::abs(r.g1) * std::abs(r.fhat1 - r.f)) / f_min_sq;
  return 4.0 / (r.delta_t * r.d_min) * (numerator_block + r.qstar.norm() * denominator_block);
}

}  // namespace sbdrift::estimator

#pragma once

#include "sbdrift/models.hpp"
#include "sbdrift/truth.hpp"
#include "sbdrift/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace sbdrift::estimator {

using models::SampleSet;
using truth::IntervalSpec;
using truth::Query;

/// Population floors f_min, D_min. The estimator is set to zero when
/// fhat_j < f_min / 2 or Dhat < D_min / 2.
struct Floors {
  double f_min = 0.0;
  double d_min = 0.0;
};

struct DriftEstimate {
  Vec value;
  double fhat1 = 0.0;
  double fhat2 = 0.0;
  double dhat = 0.0;
  bool floor_triggered = false;
};

/// Samples with nonzero kernel weight K_h(X_s - xi), kept in index order so
/// sums over the window equal sums over the whole sample bit for bit.
struct KernelWindow {
  double h = 0.0;
  std::size_t sample_count = 0;
  std::vector<std::size_t> index;
  std::vector<double> weight;
  std::vector<double> share;  // weight / weight_sum
  double weight_sum = 0.0;

  double fhat() const { return weight_sum / static_cast<double>(sample_count); }
};

KernelWindow kernel_window(const SampleSet& sample, const Vec& xi, double h);

/// sum_m F(t, xi, x, X_u) K_h(X_s - xi) and sum_m X_u F K_h over a window (not divided by M).
struct WeightedSums {
  double weight = 0.0;
  Vec target;
};

WeightedSums weighted_sums(const SampleSet& sample, const KernelWindow& window,
                           const IntervalSpec& interval, double t, const Vec& xi, const Vec& x);

/// fhat(xi) = (1/M) sum_m K_h(X_s - xi).
double estimate_f(const SampleSet& sample, const Vec& xi, double h);

/// ghat_1 = (1/M) sum_m F K_h.
double estimate_g1(const SampleSet& sample, const IntervalSpec& interval, const Query& query, double h);

/// ghat_2 = (1/M) sum_m X_u F K_h.
Vec estimate_g2(const SampleSet& sample, const IntervalSpec& interval, const Query& query, double h);

/// Plug-in drift (Nhat / Dhat - x) / (u - t) with separate bandwidths for the two blocks.
DriftEstimate estimate_drift(const SampleSet& sample, const IntervalSpec& interval,
                             const Query& query, double h1, double h2, const Floors& floors = {});

/// estimate_drift with h1 = h2 = h at every grid point; kernel weights are shared.
std::vector<DriftEstimate> estimate_drift_grid(const SampleSet& sample,
                                               const IntervalSpec& interval, double t,
                                               const Vec& xi, const std::vector<Vec>& xgrid,
                                               double h, const Floors& floors = {});

/// Estimated and population blocks at one query, for the ratio-transfer bound.
struct RatioTransferTerms {
  double fhat1;
  double fhat2;
  double ghat1;
  Vec ghat2;
  double f;
  double g1;
  Vec g2;
  Vec qstar;
  double f_min;
  double d_min;
  double delta_t;
};

/// Deterministic bound on |ahat - a*| valid when fhat_j >= f_min/2 and
/// Dhat >= D_min/2 (with f >= f_min, D* >= D_min). Returns nullopt off that event.
std::optional<double> ratio_transfer_bound(const RatioTransferTerms& terms);

}  // namespace sbdrift::estimator

#pragma once

#include "sbdrift/estimator.hpp"
#include "sbdrift/truth.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sbdrift::bandwidth {

using estimator::DriftEstimate;

/// Geometric ladder h0 q^k truncated below at h_min = c_min M^{-1/d}, so M h^d >= 81.
struct BandwidthGrid {
  double h0 = 1.2;
  double ratio = M_SQRT1_2;
  double floor = 0.0;
  std::size_t sample_size = 0;
  int dim = 1;
  std::vector<double> values;  // strictly decreasing

  std::size_t size() const { return values.size(); }
};

/// c_min: 81 for d = 1, 9 for d = 2.
double floor_constant(int dim);

BandwidthGrid build_grid(std::size_t sample_size, int dim, double h0 = 1.2, double ratio = M_SQRT1_2);

/// v0(h) = sqrt(log M / (M h^d)), natural log.
double penalty(std::size_t sample_size, double h, int dim);

/// max over the grid of |ahat - a*| (Euclidean per point).
double sup_grid_error(std::span<const DriftEstimate> estimates, const truth::TruthCache& truth);

/// (int |ahat - a*|^2 dx)^{1/2} by the trapezoid rule on the tensor grid.
double integrated_squared_error(std::span<const DriftEstimate> estimates,
                                const truth::TruthCache& truth);

/// max over the grid of |ahat_a - ahat_b|.
double sup_grid_discrepancy(std::span<const DriftEstimate> a, std::span<const DriftEstimate> b);

/// Estimates on the x-grid for every bandwidth, computed once per repetition
/// and shared by the oracle and the selector.
struct BandwidthSweep {
  std::vector<double> bandwidths;
  std::vector<std::vector<DriftEstimate>> estimates;
};

BandwidthSweep evaluate_sweep(const models::SampleSet& sample, const truth::IntervalSpec& interval,
                              double t, const Vec& xi, const std::vector<Vec>& xgrid,
                              const BandwidthGrid& grid, const estimator::Floors& floors = {});

struct OracleChoice {
  double h_or = 0.0;
  std::size_t index = 0;
  std::vector<double> errors;
};

/// argmin of the errors over a descending bandwidth list; ties go to the larger h.
OracleChoice oracle_bandwidth(std::span<const double> bandwidths, std::span<const double> errors);
OracleChoice oracle_bandwidth(const BandwidthSweep& sweep, const truth::TruthCache& truth);
OracleChoice oracle_bandwidth(const models::SampleSet& sample, const truth::IntervalSpec& interval,
                              const Vec& xi, const std::vector<Vec>& xgrid, const BandwidthGrid& grid,
                              const truth::TruthCache& truth, const estimator::Floors& floors = {});

struct SelectorDiagnostics {
  double selected_h = 0.0;
  std::size_t index = 0;
  std::vector<double> b_values;
  std::vector<double> penalties;  // kappa_final * v0(h)
  bool boundary_hit = false;
};

/// Raw-max one-sided Goldenshluger-Lepski rule:
///   B(h) = max_{h' <= h} ( |ahat_h' - ahat_h|_inf - kappa_pair v0(h') )_+,
///   hhat = argmin B(h) + kappa_final v0(h), ties to the larger h.
SelectorDiagnostics gl_select(const BandwidthSweep& sweep, std::size_t sample_size, int dim,
                              double kappa_pair = 2.0, double kappa_final = 2.0);
SelectorDiagnostics gl_select(const models::SampleSet& sample, const truth::IntervalSpec& interval,
                              double t, const Vec& xi, const std::vector<Vec>& xgrid,
                              const BandwidthGrid& grid, const estimator::Floors& floors = {},
                              double kappa_pair = 2.0, double kappa_final = 2.0);

/// err_hat / err_or; throws when err_or is zero.
double oracle_ratio(double err_hat, double err_or);

}  // namespace sbdrift::bandwidth

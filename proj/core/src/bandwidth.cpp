#include "sbdrift/bandwidth.hpp"

#include <algorithm>
#include <stdexcept>

namespace sbdrift::bandwidth {

double floor_constant(int dim) {
  if (dim == 1) return 81.0;
  if (dim == 2) return 9.0;
  throw std::invalid_argument("bandwidth floor defined for d in {1, 2}");
}

BandwidthGrid build_grid(std::size_t sample_size, int dim, double h0, double ratio) {
  if (sample_size < 1) throw std::invalid_argument("sample size must be positive");
  if (!(h0 > 0.0) || !(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("grid needs h0 > 0 and ratio in (0, 1)");
  }
  BandwidthGrid grid;
  grid.h0 = h0;
  grid.ratio = ratio;
  grid.sample_size = sample_size;
  grid.dim = dim;
  grid.floor = floor_constant(dim) * std::pow(static_cast<double>(sample_size), -1.0 / dim);
  const double min_mass = std::pow(floor_constant(dim), dim);
  for (int k = 0;; ++k) {
    const double h = h0 * std::pow(ratio, k);
    // Compare on M h^d so the floor is not lost to rounding in M^{-1/d}.
    if (static_cast<double>(sample_size) * std::pow(h, dim) < min_mass) break;
    grid.values.push_back(h);
  }
  if (grid.values.empty()) {
    throw std::invalid_argument("bandwidth grid is empty: floor " + std::to_string(grid.floor) +
                                " exceeds h0");
  }
  return grid;
}

double penalty(std::size_t sample_size, double h, int dim) {
  const double m = static_cast<double>(sample_size);
  return std::sqrt(std::log(m) / (m * std::pow(h, dim)));
}

double sup_grid_error(std::span<const DriftEstimate> estimates, const truth::TruthCache& truth) {
  if (estimates.size() != truth.size()) throw std::invalid_argument("estimate and truth grids differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    worst = std::max(worst, (estimates[k].value - truth.astar[k]).norm());
  }
  return worst;
}

double integrated_squared_error(std::span<const DriftEstimate> estimates,
                                const truth::TruthCache& truth) {
  if (estimates.size() != truth.size()) throw std::invalid_argument("estimate and truth grids differ");
  const std::size_t n = estimates.size();
  if (n < 2) return 0.0;
  std::vector<double> sq(n);
  for (std::size_t k = 0; k < n; ++k) sq[k] = (estimates[k].value - truth.astar[k]).squaredNorm();

  const int d = static_cast<int>(truth.xgrid.front().size());
  if (d == 1) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      total += 0.5 * (sq[k] + sq[k + 1]) * std::abs(truth.xgrid[k + 1](0) - truth.xgrid[k](0));
    }
    return std::sqrt(total);
  }
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n || side < 2) throw std::invalid_argument("2d ISE needs a square tensor grid");
  const double h0 = std::abs(truth.xgrid[side](0) - truth.xgrid[0](0));
  const double h1 = std::abs(truth.xgrid[1](1) - truth.xgrid[0](1));
  double total = 0.0;
  for (std::size_t i = 0; i < side; ++i) {
    const double wi = (i == 0 || i + 1 == side) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < side; ++j) {
      const double wj = (j == 0 || j + 1 == side) ? 0.5 : 1.0;
      total += wi * wj * sq[i * side + j];
    }
  }
  return std::sqrt(total * h0 * h1);
}

double sup_grid_discrepancy(std::span<const DriftEstimate> a, std::span<const DriftEstimate> b) {
  if (a.size() != b.size()) throw std::invalid_argument("estimate grids differ in length");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a[k].value - b[k].value).norm());
  return worst;
}

BandwidthSweep evaluate_sweep(const models::SampleSet& sample, const truth::IntervalSpec& interval,
                              double t, const Vec& xi, const std::vector<Vec>& xgrid,
                              const BandwidthGrid& grid, const estimator::Floors& floors) {
  BandwidthSweep sweep;
  sweep.bandwidths = grid.values;
  sweep.estimates.reserve(grid.size());
  for (double h : grid.values) {
    sweep.estimates.push_back(estimator::estimate_drift_grid(sample, interval, t, xi, xgrid, h, floors));
  }
  return sweep;
}

OracleChoice oracle_bandwidth(std::span<const double> bandwidths, std::span<const double> errors) {
  if (bandwidths.empty() || bandwidths.size() != errors.size()) {
    throw std::invalid_argument("oracle needs aligned nonempty bandwidths and errors");
  }
  OracleChoice choice;
  choice.errors.assign(errors.begin(), errors.end());
  for (std::size_t k = 1; k < bandwidths.size(); ++k) {
    const double best = errors[choice.index];
    // Equal errors keep the larger bandwidth.
    if (errors[k] < best || (errors[k] == best && bandwidths[k] > bandwidths[choice.index])) {
      choice.index = k;
    }
  }
  choice.h_or = bandwidths[choice.index];
  return choice;
}

OracleChoice oracle_bandwidth(const BandwidthSweep& sweep, const truth::TruthCache& truth) {
  std::vector<double> errors;
  errors.reserve(sweep.estimates.size());
  for (const auto& est : sweep.estimates) errors.push_back(sup_grid_error(est, truth));
  return oracle_bandwidth(sweep.bandwidths, errors);
}

OracleChoice oracle_bandwidth(const models::SampleSet& sample, const truth::IntervalSpec& interval,
                              const Vec& xi, const std::vector<Vec>& xgrid, const BandwidthGrid& grid,
                              const truth::TruthCache& truth, const estimator::Floors& floors) {
  return oracle_bandwidth(evaluate_sweep(sample, interval, truth.t, xi, xgrid, grid, floors), truth);
}

SelectorDiagnostics gl_select(const BandwidthSweep& sweep, std::size_t sample_size, int dim,
                              double kappa_pair, double kappa_final) {
  const std::size_t n = sweep.bandwidths.size();
  if (n == 0 || sweep.estimates.size() != n) throw std::invalid_argument("selector needs a nonempty sweep");
  for (std::size_t k = 1; k < n; ++k) {
    if (!(sweep.bandwidths[k] < sweep.bandwidths[k - 1])) {
      throw std::invalid_argument("selector needs strictly decreasing bandwidths");
    }
  }
  SelectorDiagnostics diag;
  diag.b_values.assign(n, 0.0);
  diag.penalties.resize(n);
  std::vector<double> v0(n);
  for (std::size_t k = 0; k < n; ++k) {
    v0[k] = penalty(sample_size, sweep.bandwidths[k], dim);
    diag.penalties[k] = kappa_final * v0[k];
  }
  // Smaller bandwidths sit at larger indices.
  for (std::size_t k = 0; k < n; ++k) {
    double b = 0.0;
    for (std::size_t j = k + 1; j < n; ++j) {
      const double excess =
          sup_grid_discrepancy(sweep.estimates[j], sweep.estimates[k]) - kappa_pair * v0[j];
      b = std::max(b, excess);
    }
    diag.b_values[k] = b;
  }
  double best = diag.b_values[0] + diag.penalties[0];
  for (std::size_t k = 1; k < n; ++k) {
    const double objective = diag.b_values[k] + diag.penalties[k];
    if (objective < best) {
      best = objective;
      diag.index = k;
    }
  }
  diag.selected_h = sweep.bandwidths[diag.index];
  diag.boundary_hit = diag.index == 0 || diag.index + 1 == n;
  return diag;
}

SelectorDiagnostics gl_select(const models::SampleSet& sample, const truth::IntervalSpec& interval,
                              double t, const Vec& xi, const std::vector<Vec>& xgrid,
                              const BandwidthGrid& grid, const estimator::Floors& floors,
                              double kappa_pair, double kappa_final) {
  return gl_select(evaluate_sweep(sample, interval, t, xi, xgrid, grid, floors), sample.size(),
                   sample.dim, kappa_pair, kappa_final);
}

double oracle_ratio(double err_hat, double err_or) {
  if (!(err_or > 0.0)) throw std::domain_error("oracle ratio undefined for zero oracle error");
  return err_hat / err_or;
}

}  // namespace sbdrift::bandwidth

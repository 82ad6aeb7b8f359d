#pragma once

#include "sbdrift/models.hpp"
#include "sbdrift/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sbdrift::truth {

/// Bridge interval [s, u] and the interior query-set parameters.
struct IntervalSpec {
  double s = 0.2;
  double u = 1.0;
  double eta = 0.05;          // minimal distance of t to u
  double state_radius = 2.0;  // R, |x| <= R
  double margin = 0.5;        // rho, distance of xi to the box boundary

  double delta() const { return u - s; }
  double delta_at(double t) const { return u - t; }
  void validate() const;
};

struct Query {
  double t;
  Vec x;
  Vec xi;
};

struct Moments {
  double dstar;
  Vec nstar;
};

/// SB weight F(t, xi, x, y) = exp(-|y-x|^2 / (2 (u-t)) + |y-xi|^2 / (2 (u-s))).
double sb_weight(const IntervalSpec& interval, double t, const Vec& xi, const Vec& x, const Vec& y);

/// exp(diam(B)^2 / (2 Delta)), an upper bound for F over the box.
double sb_weight_upper_bound(const IntervalSpec& interval, const models::SupportBox& box);

/// exp(-(C_Y + R)^2 / (2 eta)), a lower bound for F on the query set.
double sb_weight_lower_bound(const IntervalSpec& interval, const models::SupportBox& box);

/// D* and N* by quadrature. `level` 0 is the production resolution; each
/// level doubles it.
Moments population_moments(const models::PairLaw& law, const IntervalSpec& interval,
                           const Query& query, int level = 0);

/// Moments under a discrete conditional law sum_k w_k delta_{y_k}.
Moments atom_moments(const IntervalSpec& interval, const Query& query, std::span<const Vec> atoms,
                     std::span<const double> weights);

/// (N*/D* - x) / (u - t).
Vec drift_from_moments(const IntervalSpec& interval, const Query& query, const Moments& moments);

Vec true_drift(const models::PairLaw& law, const IntervalSpec& interval, const Query& query);

struct TruthCache {
  double t = 0.0;
  Vec xi;
  std::vector<Vec> xgrid;
  std::vector<double> dstar;
  std::vector<Vec> nstar;
  std::vector<Vec> astar;
  double refinement_error = 0.0;

  std::size_t size() const { return xgrid.size(); }
  double min_dstar() const;
};

inline constexpr double kTruthTolerance = 1e-6;

/// Truth on a fixed (t, xi) slice, certified by a one-step refinement.
/// Throws TruthNotConverged if the refinement changes any value by more than `tolerance`.
TruthCache build_truth_cache(const models::PairLaw& law, const IntervalSpec& interval, double t,
                             const Vec& xi, const std::vector<Vec>& xgrid,
                             double tolerance = kTruthTolerance, int level = 0);

void write_truth_csv(const std::filesystem::path& path, const TruthCache& cache);

/// Tensor grid with `points` per axis on [lo, hi]^dim (endpoints included), first axis slowest.
std::vector<Vec> tensor_grid(int dim, double lo, double hi, int points);

struct PreflightSpec {
  double t0 = 0.6;
  Vec xi0;
  std::vector<Vec> xgrid;
  std::vector<Vec> conditioning_grid;
};

struct PreflightReport {
  std::string testbed;
  double f_xi0 = 0.0;
  double min_f_grid = 0.0;
  double min_dstar = 0.0;
  double truth_error = 0.0;
  bool source_positive = false;
  bool denominator_positive = false;
  bool truth_converged = false;
  bool low_density = false;  // min f on the conditioning grid below 1e-6

  bool passed() const { return source_positive && denominator_positive && truth_converged; }
};

PreflightReport preflight(const models::PairLaw& law, const IntervalSpec& interval,
                          const PreflightSpec& spec);

void write_preflight_csv(const std::filesystem::path& path, std::span<const PreflightReport> rows);

}  // namespace sbdrift::truth

#pragma once

#include "sbdrift/bandwidth.hpp"
#include "sbdrift/config.hpp"
#include "sbdrift/estimator.hpp"
#include "sbdrift/inference.hpp"
#include "sbdrift/models.hpp"
#include "sbdrift/truth.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sbdrift::experiments {

/// Everything fixed for one testbed/variant before any sampling happens.
struct Setup {
  models::Testbed testbed;
  models::Variant variant;
  std::string label;  // "GG1", "MM1-wide", ...
  models::PairLaw law;
  truth::IntervalSpec interval;
  config::QueryPoint query;
  std::vector<Vec> xgrid;
  std::vector<Vec> conditioning_grid;
  double min_f_grid = 0.0;
};

Setup make_setup(const config::ExperimentConfig& cfg, models::Testbed testbed,
                 models::Variant variant);

/// f_min = half the minimum of f on the conditioning grid; D_min = half the
/// minimum of D* on the truth slice.
estimator::Floors floors_for(const Setup& setup, const truth::TruthCache& truth);

/// Runs body(i) for i in [0, count) on `threads` workers. Each index is
/// processed exactly once; the first exception is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

/// SVG line plot plus a sidecar CSV (same stem) with the plotted series.
void write_line_plot(const std::filesystem::path& svg_path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series, bool log_x, bool log_y);

struct RunArtifacts {
  std::vector<std::filesystem::path> raw;
  std::vector<std::filesystem::path> processed;
  std::vector<std::filesystem::path> figures;
  std::filesystem::path manifest;
};

/// results/{raw,processed,figures} under the configured output directory.
struct OutputTree {
  std::filesystem::path root;
  std::filesystem::path raw() const { return root / "raw"; }
  std::filesystem::path processed() const { return root / "processed"; }
  std::filesystem::path figures() const { return root / "figures"; }
};

void write_manifest(const std::string& experiment, const config::ExperimentConfig& cfg,
                    RunArtifacts& artifacts);

// ---------------------------------------------------------------- drivers --

struct PreflightOutcome {
  RunArtifacts artifacts;
  std::vector<truth::PreflightReport> reports;
};

PreflightOutcome run_preflight(const config::ExperimentConfig& cfg);

struct RateCurvePoint {
  std::size_t sample_size = 0;
  double mean_err_oracle = 0.0;
  double mean_ise_oracle = 0.0;
  double mean_gamma = 0.0;
  double mean_h_oracle = 0.0;
  double mean_h_selected = 0.0;
  double boundary_rate = 0.0;
  std::size_t floor_events = 0;
};

struct RateSummary {
  std::string testbed;
  int dim = 1;
  std::vector<RateCurvePoint> curve;
  double theory_slope = 0.0;
  std::optional<double> oracle_slope;  // nullopt with fewer than two sample sizes
  std::optional<double> ise_slope;
  double c_avg = 0.0;
  double c_max = 0.0;
  double boundary_avg = 0.0;
};

struct RateOutcome {
  RunArtifacts artifacts;
  std::vector<RateSummary> summaries;
};

RateOutcome run_rate(const config::ExperimentConfig& cfg);

struct CltSummary {
  std::string testbed;
  std::size_t sample_size = 0;
  double h = 0.0;
  std::size_t applicable = 0;
  double mean_z = 0.0;
  double var_z = 0.0;
  double coverage_pct = 0.0;
  inference::AndersonDarling ad;
};

struct CltOutcome {
  RunArtifacts artifacts;
  std::vector<inference::CltRecord> records;
  std::vector<CltSummary> summaries;
};

CltOutcome run_clt(const config::ExperimentConfig& cfg);

struct EdgeSummary {
  std::string testbed;
  std::vector<double> times;
  std::vector<double> mean_error;
  std::vector<double> mean_scaled_error;
  double frac_increasing = 0.0;  // E(last t) > E(first t)
  double frac_flatter = 0.0;     // max/min of Delta(t) E below max/min of E
  std::size_t repetitions = 0;
};

struct EdgeOutcome {
  RunArtifacts artifacts;
  std::vector<EdgeSummary> summaries;
};

EdgeOutcome run_edge(const config::ExperimentConfig& cfg);

struct StressSetting {
  std::string testbed;
  std::string setting;  // compact | wide
  double mean_var_wn = 0.0;
  double mean_var_wd = 0.0;
  double tau_d = 0.0;
  double pr_dhat_below = 0.0;
  double median_sup_error = 0.0;
  double median_ise = 0.0;
  double mean_gamma = 0.0;
  double mean_h_selected = 0.0;
  double boundary_rate = 0.0;
};

struct StressOutcome {
  RunArtifacts artifacts;
  std::vector<StressSetting> settings;
};

StressOutcome run_stress(const config::ExperimentConfig& cfg);

}  // namespace sbdrift::experiments

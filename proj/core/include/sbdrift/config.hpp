#pragma once

#include "sbdrift/models.hpp"
#include "sbdrift/truth.hpp"
#include "sbdrift/types.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sbdrift::config {

struct QueryPoint {
  double t0 = 0.6;
  Vec x0;
  Vec xi0;
};

struct GridSpec {
  double lower = -2.0;
  double upper = 2.0;
  int points = 200;
};

struct BandwidthSpec {
  double h0 = 1.2;
  double ratio = M_SQRT1_2;
  double kappa_pair = 2.0;
  double kappa_final = 2.0;
};

struct CltSpec {
  std::optional<double> alpha;  // per-testbed default when unset
  double c = 1.0;
  std::vector<std::size_t> sample_sizes{1000, 2000, 4000, 8000};
  std::size_t repetitions = 150;
};

struct EdgeSpec {
  std::size_t sample_size = 4000;
  std::size_t repetitions = 50;
  std::vector<double> offsets{0.40, 0.25, 0.15, 0.10, 0.05};
};

struct StressSpec {
  std::size_t sample_size = 4000;
  std::size_t repetitions = 100;
};

struct ExperimentConfig {
  std::vector<models::Testbed> testbeds;
  models::Variant variant = models::Variant::Compact;
  truth::IntervalSpec interval;
  std::optional<double> t0;
  std::optional<Vec> x0;
  std::optional<Vec> xi0;
  std::vector<std::size_t> sample_sizes{1000, 2000, 4000, 8000};
  std::optional<std::size_t> repetitions;  // per-testbed default when unset
  BandwidthSpec bandwidth;
  std::optional<GridSpec> eval_grid;
  int conditioning_points = 21;
  CltSpec clt;
  EdgeSpec edge;
  StressSpec stress;
  std::uint64_t seed = 20240601;
  std::filesystem::path output_dir = "results";
  unsigned threads = 1;
};

/// Parses the YAML schema documented in the README; unknown keys are errors.
ExperimentConfig parse(std::string_view yaml_text);
ExperimentConfig load(const std::filesystem::path& path);

/// Fixed interior query of each testbed.
QueryPoint default_query(models::Testbed testbed);
/// Desk-scale repetitions: half of the full-scale rate protocol.
std::size_t default_repetitions(models::Testbed testbed);
/// Undersmoothing exponent alpha in h = c M^{-alpha}.
double default_clt_alpha(models::Testbed testbed);
/// [-2, 2] with 200 points in d = 1; [-1.5, 1.5]^2 with 21 per axis in d = 2.
GridSpec default_eval_grid(int dim);

/// Query of `testbed` after applying the config overrides.
QueryPoint resolve_query(const ExperimentConfig& cfg, models::Testbed testbed);
GridSpec resolve_eval_grid(const ExperimentConfig& cfg, int dim);
std::size_t resolve_repetitions(const ExperimentConfig& cfg, models::Testbed testbed);

/// Canonical text of the effective configuration, and its FNV-1a hash in hex.
std::string canonical_text(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace sbdrift::config

#pragma once

#include "sbdrift/types.hpp"

#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace sbdrift {
using Rng = std::mt19937_64;
}

namespace sbdrift::models {

enum class Testbed { GG1, GG2, MM1, MM2 };
enum class Variant { Compact, Wide };
enum class Family { GaussianToGaussian, MixtureToMixture, Uniform };

Testbed parse_testbed(std::string_view name);
Variant parse_variant(std::string_view name);
std::string to_string(Testbed testbed);
std::string to_string(Variant variant);
int dimension_of(Testbed testbed);

struct SupportBox {
  Vec lower;
  Vec upper;

  static SupportBox cube(int dim, double half_width);
  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& p) const;
  double diameter() const;
  /// C_Y = sup over the box of |y|.
  double max_norm() const;
};

/// Probability that N(mean, cov) lands in the box.
double gaussian_box_mass(const Vec& mean, const Mat& cov, const SupportBox& box);

/// N(mean, cov) restricted to a box and renormalized.
class TruncatedGaussian {
 public:
  TruncatedGaussian(Vec mean, Mat cov, const SupportBox& box);

  double density(const Vec& y) const;
  double mass() const { return mass_; }
  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }

 private:
  Vec mean_;
  Mat cov_;
  Mat precision_;
  double log_norm_;  // log of Gaussian normalizing constant
  double mass_;
  SupportBox box_;
};

/// Linear-Gaussian transition y | xi ~ N(map xi + offset, cov).
struct LinearGaussian {
  Mat map;
  Vec offset;
  Mat cov;
};

struct SourceComponent {
  double weight;
  Vec mean;
  Mat cov;
};

/// Conditional law of X_u given X_s = xi with truncation masses resolved.
class ConditionalLaw {
 public:
  double density(const Vec& y) const;
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<TruncatedGaussian>& components() const { return components_; }

 private:
  friend class PairLaw;
  std::vector<double> weights_;
  std::vector<TruncatedGaussian> components_;
  bool uniform_ = false;
  double uniform_density_ = 0.0;
  SupportBox box_;
};

/// Joint law of (X_s, X_u) on a bounded box.
class PairLaw {
 public:
  PairLaw(std::string name, Family family, SupportBox box, std::vector<SourceComponent> source,
          std::vector<LinearGaussian> transitions, double gate_bias = 0.0, Vec gate_slope = Vec());

  /// Independent uniform X_s and X_u on the box. Used as a reference law in tests.
  static PairLaw uniform(SupportBox box);

  const std::string& name() const { return name_; }
  Family family() const { return family_; }
  int dim() const { return box_.dim(); }
  const SupportBox& box() const { return box_; }
  const std::vector<SourceComponent>& source() const { return source_; }
  const std::vector<LinearGaussian>& transitions() const { return transitions_; }

  /// pi(xi) = sigmoid(bias + slope . xi); weight of the first transition.
  double gate(const Vec& xi) const;

  double marginal_density(const Vec& xi) const;
  double joint_density(const Vec& xi, const Vec& y) const;
  ConditionalLaw conditional(const Vec& xi) const;

  Vec sample_source(Rng& rng) const;
  Vec sample_target(const Vec& xi, Rng& rng) const;

 private:
  Vec sample_truncated(const Vec& mean, const Mat& chol, Rng& rng) const;

  std::string name_;
  Family family_;
  SupportBox box_;
  std::vector<SourceComponent> source_;
  std::vector<TruncatedGaussian> source_truncated_;
  std::vector<Mat> source_chol_;
  std::vector<LinearGaussian> transitions_;
  std::vector<Mat> transition_chol_;
  double gate_bias_;
  Vec gate_slope_;
};

PairLaw make_law(Testbed testbed, Variant variant = Variant::Compact);
PairLaw make_law(std::string_view name, std::string_view variant = "compact");

/// M i.i.d. pairs stored row-major (m * dim + i).
struct SampleSet {
  int dim = 1;
  std::vector<double> source;
  std::vector<double> target;

  std::size_t size() const { return dim > 0 ? source.size() / static_cast<std::size_t>(dim) : 0; }
  Vec source_at(std::size_t m) const;
  Vec target_at(std::size_t m) const;
  void push_back(const Vec& xs, const Vec& xu);
};

/// Maximum rejection attempts per truncated draw.
inline constexpr long kRejectionBudget = 1'000'000;

SampleSet sample_dataset(const PairLaw& law, std::size_t count, Rng& rng);

double joint_density(const PairLaw& law, const Vec& xi, const Vec& y);
double marginal_density(const PairLaw& law, const Vec& xi);

}  // namespace sbdrift::models

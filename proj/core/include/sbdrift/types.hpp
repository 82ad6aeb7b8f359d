#pragma once

#include <Eigen/Core>

#include <span>
#include <stdexcept>
#include <string>

namespace sbdrift {

/// Points in R^d for d <= 2. Fixed capacity, so no heap allocation.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

inline constexpr int kMaxDim = 2;

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Vec scalar_vec(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

/// f(xi) too small to condition on.
class DegenerateConditioning : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truth cache failed its refinement check.
class TruthNotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or incomplete experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sbdrift

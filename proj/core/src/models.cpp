#include "sbdrift/models.hpp"

#include "sbdrift/normal.hpp"
#include "sbdrift/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sbdrift::models {

namespace {

Mat diag(std::initializer_list<double> values) {
  const Vec v = make_vec(values);
  return v.asDiagonal();
}

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Mat mat1(double a) {
  Mat m(1, 1);
  m(0, 0) = a;
  return m;
}

Mat cholesky(const Mat& cov) {
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("covariance is not positive definite");
  return llt.matrixL();
}

double interval_mass(double mean, double sd, double lo, double hi) {
  // Difference of tails on the side away from the mean keeps precision.
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  if (a > 0.0) return normal::cdf(-a) - normal::cdf(-b);
  return normal::cdf(b) - normal::cdf(a);
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

// ---------------------------------------------------------------------------

Testbed parse_testbed(std::string_view name) {
  if (name == "GG1") return Testbed::GG1;
  if (name == "GG2") return Testbed::GG2;
  if (name == "MM1") return Testbed::MM1;
  if (name == "MM2") return Testbed::MM2;
  throw std::invalid_argument("unknown testbed '" + std::string(name) + "'");
}

Variant parse_variant(std::string_view name) {
  if (name == "compact") return Variant::Compact;
  if (name == "wide") return Variant::Wide;
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

std::string to_string(Testbed testbed) {
  switch (testbed) {
    case Testbed::GG1: return "GG1";
    case Testbed::GG2: return "GG2";
    case Testbed::MM1: return "MM1";
    case Testbed::MM2: return "MM2";
  }
  return "?";
}

std::string to_string(Variant variant) { return variant == Variant::Wide ? "wide" : "compact"; }

int dimension_of(Testbed testbed) {
  return testbed == Testbed::GG1 || testbed == Testbed::MM1 ? 1 : 2;
}

// ---------------------------------------------------------------------------

SupportBox SupportBox::cube(int dim, double half_width) {
  SupportBox box;
  box.lower = Vec::Constant(dim, -half_width);
  box.upper = Vec::Constant(dim, half_width);
  return box;
}

bool SupportBox::contains(const Vec& p) const {
  if (p.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p(i) >= lower(i) && p(i) <= upper(i))) return false;
  }
  return true;
}

double SupportBox::diameter() const { return (upper - lower).norm(); }

double SupportBox::max_norm() const { return upper.cwiseAbs().cwiseMax(lower.cwiseAbs()).norm(); }

double gaussian_box_mass(const Vec& mean, const Mat& cov, const SupportBox& box) {
  const int d = box.dim();
  if (d == 1) return interval_mass(mean(0), std::sqrt(cov(0, 0)), box.lower(0), box.upper(0));
  if (d != 2) throw std::invalid_argument("box mass implemented for d <= 2");

  const double s1 = std::sqrt(cov(0, 0));
  if (cov(0, 1) == 0.0 && cov(1, 0) == 0.0) {
    return interval_mass(mean(0), s1, box.lower(0), box.upper(0)) *
           interval_mass(mean(1), std::sqrt(cov(1, 1)), box.lower(1), box.upper(1));
  }
  // P = int phi(y1) P(Y2 in [a2, b2] | y1) dy1 over [a1, b1].
  const double slope = cov(1, 0) / cov(0, 0);
  const double cond_sd = std::sqrt(cov(1, 1) - cov(1, 0) * slope);
  const double lo = std::max(box.lower(0), mean(0) - 12.0 * s1);
  const double hi = std::min(box.upper(0), mean(0) + 12.0 * s1);
  if (!(hi > lo)) return 0.0;
  const auto rule = quadrature::composite(lo, hi, 64, 16);
  double mass = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double y1 = rule.nodes[i];
    const double cond_mean = mean(1) + slope * (y1 - mean(0));
    mass += rule.weights[i] * normal::pdf((y1 - mean(0)) / s1) / s1 *
            interval_mass(cond_mean, cond_sd, box.lower(1), box.upper(1));
  }
  return mass;
}

// ---------------------------------------------------------------------------

TruncatedGaussian::TruncatedGaussian(Vec mean, Mat cov, const SupportBox& box)
    : mean_(std::move(mean)), cov_(std::move(cov)), box_(box) {
  const int d = static_cast<int>(mean_.size());
  if (d != box.dim() || cov_.rows() != d || cov_.cols() != d) {
    throw std::invalid_argument("truncated Gaussian dimension mismatch");
  }
  if (!cov_.isApprox(cov_.transpose())) throw std::invalid_argument("covariance is not symmetric");
  Eigen::LLT<Mat> llt(cov_);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("covariance is not positive definite");
  precision_ = cov_.inverse();
  const Mat l = llt.matrixL();
  double log_det = 0.0;
  for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(l(i, i));
  log_norm_ = -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det);
  mass_ = gaussian_box_mass(mean_, cov_, box_);
  if (!(mass_ > 0.0)) throw std::invalid_argument("Gaussian has no mass in the support box");
}

double TruncatedGaussian::density(const Vec& y) const {
  if (!box_.contains(y)) return 0.0;
  const Vec r = y - mean_;
  const double q = r.dot(precision_ * r);
  return std::exp(log_norm_ - 0.5 * q) / mass_;
}

double ConditionalLaw::density(const Vec& y) const {
  if (!box_.contains(y)) return 0.0;
  if (uniform_) return uniform_density_;
  double value = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    value += weights_[j] * components_[j].density(y);
  }
  return value;
}

// ---------------------------------------------------------------------------

PairLaw::PairLaw(std::string name, Family family, SupportBox box,
                 std::vector<SourceComponent> source, std::vector<LinearGaussian> transitions,
                 double gate_bias, Vec gate_slope)
    : name_(std::move(name)),
      family_(family),
      box_(std::move(box)),
      source_(std::move(source)),
      transitions_(std::move(transitions)),
      gate_bias_(gate_bias),
      gate_slope_(std::move(gate_slope)) {
  const int d = box_.dim();
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("law dimension must be 1 or 2");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(box_.lower(i) < box_.upper(i))) throw std::invalid_argument("degenerate support box");
  }
  if (family_ == Family::Uniform) return;

  double total = 0.0;
  for (const auto& c : source_) {
    source_truncated_.emplace_back(c.mean, c.cov, box_);
    source_chol_.push_back(cholesky(c.cov));
    total += c.weight;
  }
  if (source_.empty() || std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("source mixture weights must sum to one");
  }
  const std::size_t expected = family_ == Family::MixtureToMixture ? 2 : 1;
  if (transitions_.size() != expected) throw std::invalid_argument("wrong number of transitions");
  for (const auto& t : transitions_) {
    if (t.map.rows() != d || t.map.cols() != d || t.offset.size() != d) {
      throw std::invalid_argument("transition dimension mismatch");
    }
    transition_chol_.push_back(cholesky(t.cov));
  }
  if (family_ == Family::MixtureToMixture && gate_slope_.size() != d) {
    throw std::invalid_argument("gate slope dimension mismatch");
  }
}

PairLaw PairLaw::uniform(SupportBox box) {
  return PairLaw("uniform", Family::Uniform, std::move(box), {}, {});
}

double PairLaw::gate(const Vec& xi) const {
  if (family_ != Family::MixtureToMixture) return 1.0;
  return sigmoid(gate_bias_ + gate_slope_.dot(xi));
}

double PairLaw::marginal_density(const Vec& xi) const {
  if (!box_.contains(xi)) return 0.0;
  if (family_ == Family::Uniform) return 1.0 / (box_.upper - box_.lower).prod();
  double value = 0.0;
  for (std::size_t k = 0; k < source_.size(); ++k) {
    value += source_[k].weight * source_truncated_[k].density(xi);
  }
  return value;
}

ConditionalLaw PairLaw::conditional(const Vec& xi) const {
  ConditionalLaw law;
  law.box_ = box_;
  if (family_ == Family::Uniform) {
    law.uniform_ = true;
    law.uniform_density_ = 1.0 / (box_.upper - box_.lower).prod();
    return law;
  }
  const double pi = gate(xi);
  for (std::size_t j = 0; j < transitions_.size(); ++j) {
    const auto& t = transitions_[j];
    law.weights_.push_back(j == 0 ? pi : 1.0 - pi);
    law.components_.emplace_back(t.map * xi + t.offset, t.cov, box_);
  }
  return law;
}

double PairLaw::joint_density(const Vec& xi, const Vec& y) const {
  if (!box_.contains(xi) || !box_.contains(y)) return 0.0;
  return marginal_density(xi) * conditional(xi).density(y);
}

Vec PairLaw::sample_truncated(const Vec& mean, const Mat& chol, Rng& rng) const {
  std::normal_distribution<double> gauss;
  const int d = dim();
  Vec z(d);
  for (long attempt = 0; attempt < kRejectionBudget; ++attempt) {
    for (int i = 0; i < d; ++i) z(i) = gauss(rng);
    Vec draw = mean + chol * z;
    if (box_.contains(draw)) return draw;
  }
  throw std::runtime_error("truncated normal rejection sampler exhausted its retry budget");
}

Vec PairLaw::sample_source(Rng& rng) const {
  if (family_ == Family::Uniform) {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i) {
      v(i) = std::uniform_real_distribution<double>(box_.lower(i), box_.upper(i))(rng);
    }
    return v;
  }
  std::size_t k = 0;
  if (source_.size() > 1) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    while (k + 1 < source_.size() && u >= source_[k].weight) {
      u -= source_[k].weight;
      ++k;
    }
  }
  return sample_truncated(source_[k].mean, source_chol_[k], rng);
}

Vec PairLaw::sample_target(const Vec& xi, Rng& rng) const {
  if (family_ == Family::Uniform) return sample_source(rng);
  std::size_t j = 0;
  if (family_ == Family::MixtureToMixture) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    j = u < gate(xi) ? 0 : 1;
  }
  const auto& t = transitions_[j];
  return sample_truncated(t.map * xi + t.offset, transition_chol_[j], rng);
}

// ---------------------------------------------------------------------------

PairLaw make_law(Testbed testbed, Variant variant) {
  const bool wide = variant == Variant::Wide;
  if (wide && testbed != Testbed::GG1 && testbed != Testbed::MM1) {
    throw std::invalid_argument("wide variant is defined only for GG1 and MM1");
  }
  const int d = dimension_of(testbed);
  const SupportBox box = SupportBox::cube(d, wide ? 5.0 : 3.0);
  const std::string name = to_string(testbed) + (wide ? "-wide" : "");

  switch (testbed) {
    case Testbed::GG1:
      return PairLaw(name, Family::GaussianToGaussian, box,
                     {{1.0, make_vec({0.0}), mat1(1.0 * 1.0)}},
                     {{mat1(0.7), make_vec({0.3}), mat1(0.35 * 0.35)}});
    case Testbed::GG2:
      return PairLaw(name, Family::GaussianToGaussian, box,
                     {{1.0, make_vec({0.0, 0.0}), diag({1.0, 0.8})}},
                     {{mat2(0.75, 0.15, -0.10, 0.65), make_vec({0.25, -0.20}),
                       mat2(0.14, 0.03, 0.03, 0.12)}});
    case Testbed::MM1: {
      const double s = wide ? 0.8 : 0.45;
      const double s1 = wide ? 0.9 : 0.25;
      const double s2 = wide ? 1.0 : 0.30;
      return PairLaw(name, Family::MixtureToMixture, box,
                     {{0.5, make_vec({-1.2}), mat1(s * s)}, {0.5, make_vec({1.2}), mat1(s * s)}},
                     {{mat1(0.8), make_vec({0.4}), mat1(s1 * s1)},
                      {mat1(-0.5), make_vec({-0.3}), mat1(s2 * s2)}},
                     0.0, make_vec({1.5}));
    }
    case Testbed::MM2:
      return PairLaw(name, Family::MixtureToMixture, box,
                     {{0.5, make_vec({-0.9, 0.9}), diag({0.16, 0.16})},
                      {0.5, make_vec({0.9, -0.9}), diag({0.16, 0.16})}},
                     {{mat2(0.8, 0.1, 0.0, 0.7), make_vec({0.3, -0.2}), diag({0.0484, 0.0324})},
                      {mat2(-0.4, 0.2, 0.15, -0.6), make_vec({-0.35, 0.25}),
                       mat2(0.08, 0.02, 0.02, 0.07)}},
                     0.0, make_vec({1.2, -1.0}));
  }
  throw std::invalid_argument("unknown testbed");
}

PairLaw make_law(std::string_view name, std::string_view variant) {
  return make_law(parse_testbed(name), parse_variant(variant));
}

// ---------------------------------------------------------------------------

Vec SampleSet::source_at(std::size_t m) const {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = source[m * dim + i];
  return v;
}

Vec SampleSet::target_at(std::size_t m) const {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = target[m * dim + i];
  return v;
}

void SampleSet::push_back(const Vec& xs, const Vec& xu) {
  if (xs.size() != dim || xu.size() != dim) throw std::invalid_argument("sample dimension mismatch");
  for (int i = 0; i < dim; ++i) source.push_back(xs(i));
  for (int i = 0; i < dim; ++i) target.push_back(xu(i));
}

SampleSet sample_dataset(const PairLaw& law, std::size_t count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample size must be at least 1");
  SampleSet set;
  set.dim = law.dim();
  set.source.reserve(count * set.dim);
  set.target.reserve(count * set.dim);
  for (std::size_t m = 0; m < count; ++m) {
    const Vec xs = law.sample_source(rng);
    set.push_back(xs, law.sample_target(xs, rng));
  }
  return set;
}

double joint_density(const PairLaw& law, const Vec& xi, const Vec& y) {
  return law.joint_density(xi, y);
}

double marginal_density(const PairLaw& law, const Vec& xi) { return law.marginal_density(xi); }

}  // namespace sbdrift::models

#include "sbdrift/truth.hpp"

#include "sbdrift/csv.hpp"
#include "sbdrift/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbdrift::truth {

void IntervalSpec::validate() const {
  if (!(s > 0.0 && s < u)) throw std::invalid_argument("interval needs 0 < s < u");
  if (!(eta > 0.0 && eta < u - s)) throw std::invalid_argument("interval needs 0 < eta < u - s");
  if (!(state_radius > 0.0)) throw std::invalid_argument("state radius must be positive");
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be nonnegative");
}

double sb_weight(const IntervalSpec& interval, double t, const Vec& xi, const Vec& x, const Vec& y) {
  if (!(t < interval.u)) throw std::invalid_argument("SB weight is singular at t >= u");
  const double exponent = -(y - x).squaredNorm() / (2.0 * interval.delta_at(t)) +
                          (y - xi).squaredNorm() / (2.0 * interval.delta());
  return std::exp(exponent);
}

double sb_weight_upper_bound(const IntervalSpec& interval, const models::SupportBox& box) {
  const double diam = box.diameter();
  return std::exp(diam * diam / (2.0 * interval.delta()));
}

double sb_weight_lower_bound(const IntervalSpec& interval, const models::SupportBox& box) {
  const double r = box.max_norm() + interval.state_radius;
  return std::exp(-r * r / (2.0 * interval.eta));
}

namespace {

constexpr double kMinConditioningDensity = 1e-12;

void check_query(const models::PairLaw& law, const IntervalSpec& interval, const Query& q) {
  if (!(q.t < interval.u)) throw std::invalid_argument("query time must satisfy t < u");
  if (q.x.size() != law.dim() || q.xi.size() != law.dim()) {
    throw std::invalid_argument("query dimension does not match the law");
  }
}

/// Quadrature for integrals of phi(y) p(y | xi) over the box at one xi.
class ConditionalQuadrature {
 public:
  ConditionalQuadrature(const models::PairLaw& law, const Vec& xi, int level)
      : law_(law), xi_(xi), conditional_(law.conditional(xi)), level_(level) {
    const double f = law.marginal_density(xi);
    if (!(f >= kMinConditioningDensity)) {
      throw DegenerateConditioning("marginal density at the conditioning point is below 1e-12");
    }
    if (law.dim() == 2) build_tensor();
  }

  Moments moments(const IntervalSpec& interval, double t, const Vec& x) const {
    return law_.dim() == 1 ? moments_1d(interval, t, x) : moments_2d(interval, t, x);
  }

 private:
  Moments moments_1d(const IntervalSpec& interval, double t, const Vec& x) const {
    const double lo = law_.box().lower(0);
    const double hi = law_.box().upper(0);
    const double two_dt = 2.0 * interval.delta_at(t);
    const double two_delta = 2.0 * interval.delta();
    const double xv = x(0);
    const double xiv = xi_(0);
    Vec y(1);
    auto integrand = [&](double yv) {
      y(0) = yv;
      const double w = conditional_.density(y) *
                       std::exp(-(yv - xv) * (yv - xv) / two_dt + (yv - xiv) * (yv - xiv) / two_delta);
      return std::array<double, 2>{w, yv * w};
    };
    // Scale the absolute tolerance by a coarse estimate so tiny D* (t near u) keeps relative accuracy.
    const auto coarse = quadrature::panel_integral<2>(integrand, lo, hi,
                                                      quadrature::gauss_legendre(64));
    const double scale = std::max(std::abs(coarse[0]), std::numeric_limits<double>::min()) *
                         std::max(1.0, law_.box().max_norm());
    const int order = 32 << level_;
    const double tol = (level_ == 0 ? 1e-10 : 1e-12) * scale;
    const auto r = quadrature::adaptive<2>(integrand, lo, hi, order, tol);
    Moments m{r[0], Vec(1)};
    m.nstar(0) = r[1];
    return m;
  }

  void build_tensor() {
    const int panels = 25 << level_;
    for (int a = 0; a < 2; ++a) {
      axes_[a] = quadrature::composite(law_.box().lower(a), law_.box().upper(a), panels, 16);
    }
    const std::size_t n0 = axes_[0].nodes.size();
    const std::size_t n1 = axes_[1].nodes.size();
    weighted_density_.resize(n0 * n1);
    Vec y(2);
    for (std::size_t i = 0; i < n0; ++i) {
      y(0) = axes_[0].nodes[i];
      for (std::size_t j = 0; j < n1; ++j) {
        y(1) = axes_[1].nodes[j];
        weighted_density_[i * n1 + j] =
            axes_[0].weights[i] * axes_[1].weights[j] * conditional_.density(y);
      }
    }
  }

  // F factorizes over coordinates, so the tensor sum is two nested passes.
  Moments moments_2d(const IntervalSpec& interval, double t, const Vec& x) const {
    const double two_dt = 2.0 * interval.delta_at(t);
    const double two_delta = 2.0 * interval.delta();
    std::array<std::vector<double>, 2> factor;
    for (int a = 0; a < 2; ++a) {
      const auto& nodes = axes_[a].nodes;
      factor[a].resize(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double y = nodes[i];
        factor[a][i] = std::exp(-(y - x(a)) * (y - x(a)) / two_dt + (y - xi_(a)) * (y - xi_(a)) / two_delta);
      }
    }
    const std::size_t n0 = axes_[0].nodes.size();
    const std::size_t n1 = axes_[1].nodes.size();
    double d = 0.0;
    double n_first = 0.0;
    double n_second = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
      double inner = 0.0;
      double inner_y = 0.0;
      const double* row = &weighted_density_[i * n1];
      for (std::size_t j = 0; j < n1; ++j) {
        const double w = row[j] * factor[1][j];
        inner += w;
        inner_y += w * axes_[1].nodes[j];
      }
      d += factor[0][i] * inner;
      n_first += factor[0][i] * axes_[0].nodes[i] * inner;
      n_second += factor[0][i] * inner_y;
    }
    Moments m{d, Vec(2)};
    m.nstar << n_first, n_second;
    return m;
  }

  const models::PairLaw& law_;
  Vec xi_;
  models::ConditionalLaw conditional_;
  int level_;
  std::array<quadrature::Rule, 2> axes_;
  std::vector<double> weighted_density_;
};

}  // namespace

Moments population_moments(const models::PairLaw& law, const IntervalSpec& interval,
                           const Query& query, int level) {
  check_query(law, interval, query);
  return ConditionalQuadrature(law, query.xi, level).moments(interval, query.t, query.x);
}

Moments atom_moments(const IntervalSpec& interval, const Query& query, std::span<const Vec> atoms,
                     std::span<const double> weights) {
  if (atoms.size() != weights.size() || atoms.empty()) {
    throw std::invalid_argument("atoms and weights must be nonempty and aligned");
  }
  Moments m{0.0, Vec::Zero(query.x.size())};
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double w = weights[k] * sb_weight(interval, query.t, query.xi, query.x, atoms[k]);
    m.dstar += w;
    m.nstar += w * atoms[k];
  }
  return m;
}

Vec drift_from_moments(const IntervalSpec& interval, const Query& query, const Moments& moments) {
  return (moments.nstar / moments.dstar - query.x) / interval.delta_at(query.t);
}

Vec true_drift(const models::PairLaw& law, const IntervalSpec& interval, const Query& query) {
  return drift_from_moments(interval, query, population_moments(law, interval, query));
}

double TruthCache::min_dstar() const {
  return dstar.empty() ? 0.0 : *std::min_element(dstar.begin(), dstar.end());
}

TruthCache build_truth_cache(const models::PairLaw& law, const IntervalSpec& interval, double t,
                             const Vec& xi, const std::vector<Vec>& xgrid, double tolerance,
                             int level) {
  if (xgrid.empty()) throw std::invalid_argument("truth cache needs a nonempty grid");
  check_query(law, interval, {t, xgrid.front(), xi});
  TruthCache cache;
  cache.t = t;
  cache.xi = xi;
  cache.xgrid = xgrid;
  const ConditionalQuadrature base(law, xi, level);
  const ConditionalQuadrature fine(law, xi, level + 1);
  double change = 0.0;
  for (const Vec& x : xgrid) {
    const Query q{t, x, xi};
    const Moments m = base.moments(interval, t, x);
    const Moments mf = fine.moments(interval, t, x);
    const Vec a = drift_from_moments(interval, q, m);
    const Vec af = drift_from_moments(interval, q, mf);
    change = std::max({change, std::abs(m.dstar - mf.dstar), (m.nstar - mf.nstar).cwiseAbs().maxCoeff(),
                       (a - af).cwiseAbs().maxCoeff()});
    cache.dstar.push_back(m.dstar);
    cache.nstar.push_back(m.nstar);
    cache.astar.push_back(a);
  }
  cache.refinement_error = change;
  if (!(change <= tolerance)) {
    throw TruthNotConverged("truth refinement changed values by " + csv::format(change) +
                            " (tolerance " + csv::format(tolerance) + ")");
  }
  for (double d : cache.dstar) {
    if (!(d > 0.0)) throw TruthNotConverged("population denominator is not positive on the grid");
  }
  return cache;
}

void write_truth_csv(const std::filesystem::path& path, const TruthCache& cache) {
  const int d = cache.xi.size();
  std::vector<std::string> header{"t"};
  for (int i = 0; i < d; ++i) header.push_back("x" + std::to_string(i + 1));
  for (int i = 0; i < d; ++i) header.push_back("xi" + std::to_string(i + 1));
  header.push_back("dstar");
  for (int i = 0; i < d; ++i) header.push_back("nstar" + std::to_string(i + 1));
  for (int i = 0; i < d; ++i) header.push_back("astar" + std::to_string(i + 1));
  csv::Writer out(path, header);
  for (std::size_t k = 0; k < cache.size(); ++k) {
    out << cache.t;
    for (int i = 0; i < d; ++i) out << cache.xgrid[k](i);
    for (int i = 0; i < d; ++i) out << cache.xi(i);
    out << cache.dstar[k];
    for (int i = 0; i < d; ++i) out << cache.nstar[k](i);
    for (int i = 0; i < d; ++i) out << cache.astar[k](i);
    out.end_row();
  }
}

std::vector<Vec> tensor_grid(int dim, double lo, double hi, int points) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (points < 1) throw std::invalid_argument("grid needs at least one point per axis");
  std::vector<double> axis(points);
  for (int i = 0; i < points; ++i) {
    axis[i] = points == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (points - 1);
  }
  std::vector<Vec> grid;
  if (dim == 1) {
    for (double a : axis) grid.push_back(scalar_vec(a));
  } else {
    for (double a : axis) {
      for (double b : axis) grid.push_back(make_vec({a, b}));
    }
  }
  return grid;
}

PreflightReport preflight(const models::PairLaw& law, const IntervalSpec& interval,
                          const PreflightSpec& spec) {
  PreflightReport report;
  report.testbed = law.name();
  report.f_xi0 = law.marginal_density(spec.xi0);
  report.min_f_grid = std::numeric_limits<double>::infinity();
  for (const Vec& xi : spec.conditioning_grid) {
    report.min_f_grid = std::min(report.min_f_grid, law.marginal_density(xi));
  }
  report.source_positive = report.f_xi0 > 0.0;
  report.low_density = report.min_f_grid < 1e-6;
  try {
    const TruthCache cache =
        build_truth_cache(law, interval, spec.t0, spec.xi0, spec.xgrid,
                          std::numeric_limits<double>::infinity());
    report.min_dstar = cache.min_dstar();
    report.truth_error = cache.refinement_error;
    report.denominator_positive = report.min_dstar > 0.0;
    report.truth_converged = cache.refinement_error <= kTruthTolerance;
  } catch (const TruthNotConverged&) {
    report.denominator_positive = false;
    report.truth_converged = false;
    report.truth_error = std::numeric_limits<double>::infinity();
  }
  return report;
}

void write_preflight_csv(const std::filesystem::path& path, std::span<const PreflightReport> rows) {
  csv::Writer out(path, {"testbed", "f_xi0", "min_f_grid", "min_dstar", "truth_error", "passed",
                         "low_density"});
  for (const auto& r : rows) {
    out << r.testbed << r.f_xi0 << r.min_f_grid << r.min_dstar << r.truth_error << r.passed()
        << r.low_density;
    out.end_row();
  }
}

}  // namespace sbdrift::truth

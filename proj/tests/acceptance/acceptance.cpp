// Acceptance suite: one PASS/FAIL line per criterion, desk-scale settings.
//
//   sbdrift_acceptance [output_dir]
//
// The exit status is nonzero only when the suite itself cannot run; the
// verdict of each criterion is the printed line.

#include "sbdrift/bandwidth.hpp"
#include "sbdrift/config.hpp"
#include "sbdrift/estimator.hpp"
#include "sbdrift/experiments.hpp"
#include "sbdrift/inference.hpp"
#include "sbdrift/kernels.hpp"
#include "sbdrift/quadrature.hpp"
#include "sbdrift/truth.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace sbdrift;
using models::Testbed;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

int failures = 0;

void run(int id, const std::string& title, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] criterion %d: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), secs);
  for (const auto& d : v.details) std::printf("         %s\n", d.c_str());
  std::fflush(stdout);
  failures += v.pass ? 0 : 1;
}

config::ExperimentConfig base_config(const fs::path& out, const std::string& yaml) {
  auto cfg = config::parse(yaml);
  cfg.output_dir = out;
  cfg.threads = worker_count();
  return cfg;
}

const truth::IntervalSpec kInterval{};

Verdict preflight_fidelity(const fs::path& out) {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const auto r = experiments::run_preflight(base_config(out, "testbed: [GG1, MM1, GG2, MM2]\n"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& gg1 = r.reports[0];
  const auto& mm1 = r.reports[1];
  v.check(std::abs(gg1.f_xi0 - 0.4000223) <= 1e-5, fmt("GG1 f(xi0) = %.7f (target 0.4000223 +- 1e-5)", gg1.f_xi0));
  v.check(std::abs(gg1.min_dstar - 6.140077e-3) <= 2e-5,
          fmt("GG1 min D* = %.6e (target 6.140077e-3 +- 2e-5)", gg1.min_dstar));
  v.check(std::abs(mm1.min_dstar - 0.2997735) <= 1e-4, fmt("MM1 min D* = %.7f (target 0.2997735 +- 1e-4)", mm1.min_dstar));
  for (const auto& rep : r.reports) {
    v.check(rep.truth_error <= 1e-6, rep.testbed + fmt(" truth refinement error %.2e <= 1e-6", rep.truth_error));
  }
  v.check(secs < 60.0, fmt("runtime %.1f s < 60 s", secs));
  return v;
}

Verdict theory_slopes() {
  Verdict v;
  const double s1 = inference::theory_secant_slope(1000, 8000, 1);
  const double s2 = inference::theory_secant_slope(1000, 8000, 2);
  v.check(std::abs(s1 + 0.349379) <= 1e-6, fmt("d=1 secant %.7f (target -0.349379)", s1));
  v.check(std::abs(s2 + 0.291150) <= 1e-6, fmt("d=2 secant %.7f (target -0.291150)", s2));
  return v;
}

experiments::RateOutcome rate_run;

Verdict rate_reproduction(const fs::path& out) {
  Verdict v;
  rate_run = experiments::run_rate(base_config(out, R"(
testbed: [GG1, MM1]
sample_sizes: [1000, 2000, 4000, 8000]
repetitions: 20
)"));
  const auto& gg1 = rate_run.summaries[0];
  const auto& mm1 = rate_run.summaries[1];
  v.check(gg1.oracle_slope && std::abs(*gg1.oracle_slope + 0.349) <= 0.10,
          fmt("GG1 oracle OLS slope %.4f (target -0.349 +- 0.10)", gg1.oracle_slope.value_or(NAN)));
  v.check(mm1.oracle_slope && std::abs(*mm1.oracle_slope + 0.349) <= 0.12,
          fmt("MM1 oracle OLS slope %.4f (target -0.349 +- 0.12)", mm1.oracle_slope.value_or(NAN)));
  return v;
}

Verdict adaptivity() {
  Verdict v;
  if (rate_run.summaries.empty()) {
    v.check(false, "rate run unavailable");
    return v;
  }
  for (const auto& s : rate_run.summaries) {
    v.check(s.c_avg <= 3.0, s.testbed + fmt(" C_avg %.4f <= 3.0", s.c_avg));
    v.check(s.c_max <= 4.0, s.testbed + fmt(" C_max %.4f <= 4.0", s.c_max));
    v.check(s.boundary_avg <= 0.05, s.testbed + fmt(" boundary-hit rate %.4f <= 0.05", s.boundary_avg));
  }
  return v;
}

Verdict clt(const fs::path& out) {
  Verdict v;
  const auto r = experiments::run_clt(base_config(out, R"(
testbed: [GG1, MM1]
clt: {sample_sizes: [4000], repetitions: 150, c: 1.0}
)"));
  for (const auto& s : r.summaries) {
    const std::string tb = s.testbed + " M=4000: ";
    v.check(s.applicable == 150, tb + fmt("applicable reps %.0f of 150", static_cast<double>(s.applicable)));
    v.check(s.coverage_pct >= 90.0 && s.coverage_pct <= 99.0, tb + fmt("coverage %.2f%% in [90, 99]", s.coverage_pct));
    v.check(std::abs(s.mean_z) <= 0.2, tb + fmt("|mean Z| %.4f <= 0.2", std::abs(s.mean_z)));
    v.check(s.var_z >= 0.65 && s.var_z <= 1.35, tb + fmt("Var(Z) %.4f in [0.65, 1.35]", s.var_z));
    v.check(!s.ad.reject_5pct, tb + fmt("AD %.4f, reject@5%% false (crit %.2f)", s.ad.statistic, inference::kAndersonCritical5));
  }
  return v;
}

Verdict stress(const fs::path& out) {
  Verdict v;
  const auto r = experiments::run_stress(base_config(out, R"(
testbed: [GG1, MM1]
stress: {sample_size: 4000, repetitions: 100}
)"));
  auto find = [&](const std::string& tb, const std::string& setting) {
    for (const auto& s : r.settings) {
      if (s.testbed == tb && s.setting == setting) return s;
    }
    throw std::runtime_error("missing stress setting");
  };
  const auto mc = find("MM1", "compact"), mw = find("MM1", "wide");
  const auto gc = find("GG1", "compact"), gw = find("GG1", "wide");
  const double mm_ratio = mw.median_sup_error / mc.median_sup_error;
  const double gg_ratio = gw.median_sup_error / gc.median_sup_error;
  v.check(mm_ratio >= 3.0, fmt("MM1 wide/compact median sup error %.4f / %.4f = %.2f >= 3", mw.median_sup_error,
                               mc.median_sup_error, mm_ratio));
  v.check(mw.pr_dhat_below >= 0.02, fmt("MM1 wide Pr(Dhat <= tau_D) %.2f >= 0.02 (tau_D %.4f)", mw.pr_dhat_below, mw.tau_d));
  v.check(mc.pr_dhat_below == 0.0, fmt("MM1 compact Pr(Dhat <= tau_D) %.2f = 0", mc.pr_dhat_below));
  v.check(gg_ratio <= 2.0, fmt("GG1 wide/compact median sup error %.4f / %.4f = %.2f <= 2", gw.median_sup_error,
                               gc.median_sup_error, gg_ratio));
  return v;
}

Verdict edge(const fs::path& out) {
  Verdict v;
  const auto r = experiments::run_edge(base_config(out, R"(
testbed: GG1
edge: {sample_size: 4000, repetitions: 50}
)"));
  const auto& s = r.summaries.at(0);
  v.check(s.frac_flatter >= 0.9, fmt("GG1 rescaled curve flatter in %.0f%% of 50 seeds (>= 90%%)", 100.0 * s.frac_flatter));
  v.details.push_back(fmt("info GG1 raw error increasing toward u in %.0f%% of seeds", 100.0 * s.frac_increasing));
  return v;
}

Verdict properties(const fs::path& out) {
  Verdict v;

  // Kernel unit mass.
  {
    const auto rule = quadrature::composite(-1.0, 1.0, 1, 4);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const std::array<double, 1> z1{rule.nodes[i]};
      m1 += rule.weights[i] * kernels::eval_kernel({1}, z1);
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const std::array<double, 2> z2{rule.nodes[i], rule.nodes[j]};
        m2 += rule.weights[i] * rule.weights[j] * kernels::eval_kernel({2}, z2);
      }
    }
    v.check(std::abs(m1 - 1.0) <= 1e-10 && std::abs(m2 - 1.0) <= 1e-10,
            fmt("kernel mass d=1 %.3e, d=2 %.3e off 1 (<= 1e-10)", std::abs(m1 - 1.0), std::abs(m2 - 1.0)));
  }

  // Single-pair drift identity.
  {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.5, 2.5), t(0.2, 0.95), h(0.05, 1.5);
    int exact = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
      models::SampleSet one;
      one.dim = 1;
      const double xs = u(rng), xu = u(rng);
      one.push_back(scalar_vec(xs), scalar_vec(xu));
      const truth::Query q{t(rng), scalar_vec(u(rng)), scalar_vec(xs)};
      const auto est = estimator::estimate_drift(one, kInterval, q, h(rng), h(rng));
      exact += est.value(0) == (xu - q.x(0)) / kInterval.delta_at(q.t) ? 1 : 0;
    }
    v.check(exact == trials, fmt("M=1 identity exact in %.0f of %.0f instances", exact, trials));
  }

  // Ratio-transfer inequality on random GG1 instances on the floor event.
  {
    const auto law = models::make_law(Testbed::GG1);
    const estimator::Floors floors{0.5 * 5.413713e-2, 0.5 * 6.140077e-3};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> t(0.2, 0.95), x(-2.0, 2.0), xi(-2.0, 2.0), h(0.05, 0.6);
    std::uniform_int_distribution<std::size_t> m(200, 4000);
    int on_event = 0, holds = 0;
    for (int trial = 0; trial < 2000 && on_event < 100; ++trial) {
      Rng srng(rng());
      const auto sample = models::sample_dataset(law, m(rng), srng);
      const truth::Query q{t(rng), scalar_vec(x(rng)), scalar_vec(xi(rng))};
      const double h1 = h(rng), h2 = h(rng);
      const double f = law.marginal_density(q.xi);
      const auto pm = truth::population_moments(law, kInterval, q);
      const estimator::RatioTransferTerms terms{estimator::estimate_f(sample, q.xi, h1),
                                                estimator::estimate_f(sample, q.xi, h2),
                                                estimator::estimate_g1(sample, kInterval, q, h1),
                                                estimator::estimate_g2(sample, kInterval, q, h2),
                                                f,
                                                f * pm.dstar,
                                                f * pm.nstar,
                                                pm.nstar / pm.dstar,
                                                floors.f_min,
                                                floors.d_min,
                                                kInterval.delta_at(q.t)};
      const auto bound = estimator::ratio_transfer_bound(terms);
      if (!bound) continue;
      ++on_event;
      const auto est = estimator::estimate_drift(sample, kInterval, q, h1, h2, floors);
      holds += std::abs(est.value(0) - truth::drift_from_moments(kInterval, q, pm)(0)) <= *bound ? 1 : 0;
    }
    v.check(on_event == 100 && holds == 100, fmt("ratio transfer holds on %.0f of %.0f instances on the event", holds, on_event));
  }

  // Quadrature against conditional Monte Carlo, 20 interior queries per law.
  {
    int agree = 0, total = 0;
    double worst = 0.0;
    for (Testbed tb : {Testbed::GG1, Testbed::MM1, Testbed::GG2, Testbed::MM2}) {
      const auto law = models::make_law(tb);
      const int d = law.dim();
      std::mt19937_64 rng(100 + static_cast<int>(tb));
      std::uniform_real_distribution<double> t(kInterval.s, kInterval.u - kInterval.eta);
      std::uniform_real_distribution<double> x(-2.0 / std::sqrt(d), 2.0 / std::sqrt(d));
      std::uniform_real_distribution<double> xi(-1.5, 1.5);
      for (int k = 0; k < 20; ++k) {
        Vec xv(d), xiv(d);
        for (int i = 0; i < d; ++i) {
          xv(i) = x(rng);
          xiv(i) = xi(rng);
        }
        const truth::Query q{t(rng), xv, xiv};
        const double quad = truth::population_moments(law, kInterval, q).dstar;
        Rng mrng(rng());
        const int draws = 200000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < draws; ++i) {
          const double w = truth::sb_weight(kInterval, q.t, q.xi, q.x, law.sample_target(q.xi, mrng));
          s += w;
          s2 += w * w;
        }
        const double mean = s / draws;
        const double se = std::sqrt((s2 / draws - mean * mean) / draws);
        const double zscore = std::abs(quad - mean) / se;
        worst = std::max(worst, zscore);
        agree += zscore <= 4.0 ? 1 : 0;
        ++total;
      }
    }
    v.check(agree == total, fmt("quadrature vs Monte Carlo D*: %.0f of %.0f within 4 SE (worst %.2f SE)", agree, total, worst));
  }

  // Thread-count independence of the raw outputs.
  {
    const std::string yaml = "testbed: [GG1, MM1]\nsample_sizes: [1000, 2000]\nrepetitions: 6\n";
    auto one = base_config(out / "threads1", yaml);
    auto eight = base_config(out / "threads8", yaml);
    one.threads = 1;
    eight.threads = 8;
    experiments::run_rate(one);
    experiments::run_rate(eight);
    one.clt.sample_sizes = eight.clt.sample_sizes = {1000};
    one.clt.repetitions = eight.clt.repetitions = 20;
    experiments::run_clt(one);
    experiments::run_clt(eight);
    bool identical = true;
    for (const char* f : {"raw/rate_bandwidths.csv", "raw/rate_selection.csv", "raw/pointwise_clt.csv"}) {
      const auto a = slurp(one.output_dir / f);
      identical = identical && !a.empty() && a == slurp(eight.output_dir / f);
    }
    v.check(identical, "rate and CLT raw CSVs bit-identical with 1 and 8 threads");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "sbdrift_acceptance";
  fs::remove_all(out);
  std::printf("acceptance suite, output under %s, %u worker thread(s)\n", out.string().c_str(), worker_count());
  run(1, "preflight fidelity", [&] { return preflight_fidelity(out / "preflight"); });
  run(2, "theory slope constants", [] { return theory_slopes(); });
  run(3, "rate reproduction (R_M = 20)", [&] { return rate_reproduction(out / "rate"); });
  run(4, "adaptivity", [] { return adaptivity(); });
  run(5, "pointwise CLT (M = 4000, 150 reps)", [&] { return clt(out / "clt"); });
  run(6, "bounded-support stress test (100 reps)", [&] { return stress(out / "stress"); });
  run(7, "terminal edge (50 seeds)", [&] { return edge(out / "edge"); });
  run(8, "property suite", [&] { return properties(out / "properties"); });
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return 0;
}

#include "sbdrift/csv.hpp"
#include "sbdrift/experiments.hpp"
#include "sbdrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbdrift::experiments {

namespace {

using models::Testbed;
using models::Variant;

double safe_ratio(double err_hat, double err_or) {
  if (err_or > 0.0) return bandwidth::oracle_ratio(err_hat, err_or);
  return err_hat > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

std::size_t count_floors(const std::vector<estimator::DriftEstimate>& estimates) {
  return static_cast<std::size_t>(std::count_if(estimates.begin(), estimates.end(),
                                                [](const auto& e) { return e.floor_triggered; }));
}

truth::TruthCache truth_slice(const Setup& s, double t) {
  return truth::build_truth_cache(s.law, s.interval, t, s.query.xi0, s.xgrid);
}

}  // namespace

// ------------------------------------------------------------- preflight --

PreflightOutcome run_preflight(const config::ExperimentConfig& cfg) {
  if (cfg.testbeds.empty()) throw ConfigError("no testbed configured");
  const OutputTree tree{cfg.output_dir};
  PreflightOutcome outcome;
  for (Testbed tb : cfg.testbeds) {
    const Setup s = make_setup(cfg, tb, cfg.variant);
    truth::PreflightSpec spec{s.query.t0, s.query.xi0, s.xgrid, s.conditioning_grid};
    auto report = truth::preflight(s.law, s.interval, spec);
    if (!report.truth_converged) {
      throw TruthNotConverged("preflight: truth cache for " + s.label + " failed its refinement check");
    }
    const auto cache = truth_slice(s, s.query.t0);
    const auto truth_path = tree.raw() / ("truth_" + s.label + ".csv");
    truth::write_truth_csv(truth_path, cache);
    outcome.artifacts.raw.push_back(truth_path);
    outcome.reports.push_back(std::move(report));
  }
  const auto path = tree.raw() / "preflight.csv";
  truth::write_preflight_csv(path, outcome.reports);
  outcome.artifacts.raw.insert(outcome.artifacts.raw.begin(), path);
  write_manifest("preflight", cfg, outcome.artifacts);
  return outcome;
}

// ------------------------------------------------------------------ rate --

namespace {

struct RateRep {
  std::vector<double> sup_errors;
  std::vector<double> ises;
  std::vector<std::size_t> floor_counts;
  bandwidth::OracleChoice oracle;
  bandwidth::SelectorDiagnostics selector;
  double err_or = 0.0;
  double err_hat = 0.0;
  double gamma = 0.0;
};

}  // namespace

RateOutcome run_rate(const config::ExperimentConfig& cfg) {
  if (cfg.testbeds.empty()) throw ConfigError("no testbed configured");
  const OutputTree tree{cfg.output_dir};
  RateOutcome outcome;

  const auto per_h_path = tree.raw() / "rate_bandwidths.csv";
  const auto sel_path = tree.raw() / "rate_selection.csv";
  csv::Writer per_h(per_h_path, {"testbed", "M", "rep", "h_index", "h", "sup_error", "ise", "floor_count"});
  csv::Writer sel(sel_path, {"testbed", "M", "rep", "h_or", "h_hat", "err_or", "err_hat", "gamma",
                             "boundary_hit", "floor_count_hat"});

  for (Testbed tb : cfg.testbeds) {
    const Setup s = make_setup(cfg, tb, cfg.variant);
    const auto truth = truth_slice(s, s.query.t0);
    const auto floors = floors_for(s, truth);
    const std::size_t reps = config::resolve_repetitions(cfg, tb);
    const int d = s.law.dim();

    RateSummary summary;
    summary.testbed = s.label;
    summary.dim = d;
    for (std::size_t m : cfg.sample_sizes) {
      const auto grid = bandwidth::build_grid(m, d, cfg.bandwidth.h0, cfg.bandwidth.ratio);
      std::vector<RateRep> results(reps);
      parallel_for(reps, cfg.threads, [&](std::size_t r) {
        auto rng = rng::derive_stream(cfg.seed, {"rate", s.label, m, r});
        const auto sample = models::sample_dataset(s.law, m, rng);
        const auto sweep = bandwidth::evaluate_sweep(sample, s.interval, s.query.t0, s.query.xi0,
                                                     s.xgrid, grid, floors);
        RateRep& out = results[r];
        for (const auto& est : sweep.estimates) {
          out.sup_errors.push_back(bandwidth::sup_grid_error(est, truth));
          out.ises.push_back(bandwidth::integrated_squared_error(est, truth));
          out.floor_counts.push_back(count_floors(est));
        }
        out.oracle = bandwidth::oracle_bandwidth(sweep.bandwidths, out.sup_errors);
        out.selector = bandwidth::gl_select(sweep, m, d, cfg.bandwidth.kappa_pair, cfg.bandwidth.kappa_final);
        out.err_or = out.sup_errors[out.oracle.index];
        out.err_hat = out.sup_errors[out.selector.index];
        out.gamma = safe_ratio(out.err_hat, out.err_or);
      });

      RateCurvePoint point;
      point.sample_size = m;
      for (std::size_t r = 0; r < reps; ++r) {
        const RateRep& rep = results[r];
        for (std::size_t k = 0; k < grid.size(); ++k) {
          per_h << s.label << m << r << k << grid.values[k] << rep.sup_errors[k] << rep.ises[k]
                << rep.floor_counts[k];
          per_h.end_row();
        }
        sel << s.label << m << r << rep.oracle.h_or << rep.selector.selected_h << rep.err_or
            << rep.err_hat << rep.gamma << rep.selector.boundary_hit
            << rep.floor_counts[rep.selector.index];
        sel.end_row();
        point.mean_err_oracle += rep.err_or;
        point.mean_ise_oracle += rep.ises[rep.oracle.index];
        point.mean_gamma += rep.gamma;
        point.mean_h_oracle += rep.oracle.h_or;
        point.mean_h_selected += rep.selector.selected_h;
        point.boundary_rate += rep.selector.boundary_hit ? 1.0 : 0.0;
        for (auto c : rep.floor_counts) point.floor_events += c;
      }
      const double n = static_cast<double>(reps);
      point.mean_err_oracle /= n;
      point.mean_ise_oracle /= n;
      point.mean_gamma /= n;
      point.mean_h_oracle /= n;
      point.mean_h_selected /= n;
      point.boundary_rate /= n;
      summary.curve.push_back(point);
    }

    std::vector<double> log_m, log_err, log_ise;
    for (const auto& p : summary.curve) {
      log_m.push_back(std::log(static_cast<double>(p.sample_size)));
      log_err.push_back(std::log(p.mean_err_oracle));
      log_ise.push_back(std::log(p.mean_ise_oracle));
      summary.c_avg += p.mean_gamma;
      summary.c_max = std::max(summary.c_max, p.mean_gamma);
      summary.boundary_avg += p.boundary_rate;
    }
    summary.c_avg /= static_cast<double>(summary.curve.size());
    summary.boundary_avg /= static_cast<double>(summary.curve.size());
    const auto [m_lo, m_hi] = std::minmax_element(cfg.sample_sizes.begin(), cfg.sample_sizes.end());
    if (*m_lo != *m_hi) {
      summary.theory_slope = inference::theory_secant_slope(static_cast<double>(*m_lo),
                                                            static_cast<double>(*m_hi), d);
      summary.oracle_slope = inference::ols_slope(log_m, log_err);
      summary.ise_slope = inference::ols_slope(log_m, log_ise);
    } else {
      summary.theory_slope = std::numeric_limits<double>::quiet_NaN();
    }
    outcome.summaries.push_back(std::move(summary));
  }
  outcome.artifacts.raw = {per_h_path, sel_path};

  const auto curves_path = tree.processed() / "rate_curves.csv";
  const auto summary_path = tree.processed() / "rate_summary.csv";
  {
    csv::Writer curves(curves_path, {"testbed", "M", "mean_err_oracle", "mean_ise_oracle", "mean_gamma",
                                     "mean_h_or", "mean_h_hat", "boundary_rate", "floor_events"});
    csv::Writer table(summary_path, {"testbed", "d", "theory_slope", "oracle_slope", "ise_slope",
                                     "c_avg", "c_max", "boundary_avg", "note"});
    for (const auto& sm : outcome.summaries) {
      for (const auto& p : sm.curve) {
        curves << sm.testbed << p.sample_size << p.mean_err_oracle << p.mean_ise_oracle << p.mean_gamma
               << p.mean_h_oracle << p.mean_h_selected << p.boundary_rate << p.floor_events;
        curves.end_row();
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      table << sm.testbed << sm.dim << sm.theory_slope << sm.oracle_slope.value_or(nan)
            << sm.ise_slope.value_or(nan) << sm.c_avg << sm.c_max << sm.boundary_avg
            << (sm.oracle_slope ? "" : "insufficient points for a slope fit");
      table.end_row();
    }
  }
  outcome.artifacts.processed = {curves_path, summary_path};

  for (const auto& sm : outcome.summaries) {
    Series oracle{"oracle h_or", {}, {}, false};
    Series theory{"theory rate", {}, {}, true};
    Series gamma{"mean Gamma", {}, {}, false};
    const double p = 2.0 / (4.0 + sm.dim);
    const auto& first = sm.curve.front();
    const double m1 = static_cast<double>(first.sample_size);
    for (const auto& pt : sm.curve) {
      const double m = static_cast<double>(pt.sample_size);
      oracle.x.push_back(m);
      oracle.y.push_back(pt.mean_err_oracle);
      theory.x.push_back(m);
      theory.y.push_back(first.mean_err_oracle * std::pow((std::log(m) / m) / (std::log(m1) / m1), p));
      gamma.x.push_back(m);
      gamma.y.push_back(pt.mean_gamma);
    }
    const auto fig = tree.figures() / ("rate_" + sm.testbed + ".svg");
    write_line_plot(fig, sm.testbed + " sup-grid error", "M", "mean E_inf", {oracle, theory}, true, true);
    const auto gfig = tree.figures() / ("oracle_ratio_" + sm.testbed + ".svg");
    write_line_plot(gfig, sm.testbed + " oracle ratio", "M", "mean Gamma", {gamma}, true, false);
    outcome.artifacts.figures.push_back(fig);
    outcome.artifacts.figures.push_back(gfig);
  }
  write_manifest("rate", cfg, outcome.artifacts);
  return outcome;
}

// ------------------------------------------------------------------- clt --

CltOutcome run_clt(const config::ExperimentConfig& cfg) {
  if (cfg.testbeds.empty()) throw ConfigError("no testbed configured");
  const OutputTree tree{cfg.output_dir};
  CltOutcome outcome;
  const auto raw_path = tree.raw() / "pointwise_clt.csv";
  csv::Writer raw(raw_path, {"testbed", "M", "rep", "h", "a_hat", "a_star", "sigma_hat", "z", "ci_lo",
                             "ci_hi", "covered", "applicable"});

  for (Testbed tb : cfg.testbeds) {
    if (models::dimension_of(tb) != 1) {
      throw ConfigError("the CLT experiment is defined for one-dimensional testbeds only");
    }
    const Setup s = make_setup(cfg, tb, cfg.variant);
    const auto slice = truth_slice(s, s.query.t0);
    const auto floors = floors_for(s, slice);
    const truth::Query query{s.query.t0, s.query.x0, s.query.xi0};
    const double a_star = truth::true_drift(s.law, s.interval, query)(0);
    const double alpha = cfg.clt.alpha.value_or(config::default_clt_alpha(tb));

    for (std::size_t m : cfg.clt.sample_sizes) {
      const double h = cfg.clt.c * std::pow(static_cast<double>(m), -alpha);
      std::vector<inference::CltRecord> records(cfg.clt.repetitions);
      parallel_for(records.size(), cfg.threads, [&](std::size_t r) {
        auto rng = rng::derive_stream(cfg.seed, {"clt", s.label, m, r});
        const auto sample = models::sample_dataset(s.law, m, rng);
        inference::CltRecord& rec = records[r];
        rec.rep = r;
        rec.sample_size = m;
        rec.h = h;
        rec.a_star = a_star;
        const auto est = estimator::estimate_drift(sample, s.interval, query, h, h, floors);
        rec.a_hat = est.value(0);
        const auto sigma = inference::plugin_variance(sample, s.interval, query, h, floors);
        if (!sigma || !(*sigma > 0.0)) {
          rec.applicable = false;
          rec.sigma_hat = sigma.value_or(0.0);
          rec.z = std::numeric_limits<double>::quiet_NaN();
          rec.ci_lo = rec.ci_hi = rec.a_hat;
          return;
        }
        rec.sigma_hat = *sigma;
        rec.z = inference::standardized_stat(rec.a_hat, a_star, rec.sigma_hat, m, h, 1);
        const auto ci = inference::confidence_interval(rec.a_hat, rec.sigma_hat, m, h, 1);
        rec.ci_lo = ci.lo;
        rec.ci_hi = ci.hi;
        rec.covered = std::abs(rec.z) <= inference::kZ95;
      });

      CltSummary sm;
      sm.testbed = s.label;
      sm.sample_size = m;
      sm.h = h;
      std::vector<double> z;
      std::size_t covered = 0;
      for (const auto& rec : records) {
        raw << s.label << m << rec.rep << rec.h << rec.a_hat << rec.a_star << rec.sigma_hat << rec.z
            << rec.ci_lo << rec.ci_hi << rec.covered << rec.applicable;
        raw.end_row();
        if (rec.applicable) {
          z.push_back(rec.z);
          covered += rec.covered ? 1 : 0;
        }
      }
      sm.applicable = z.size();
      if (z.size() >= 2) {
        sm.mean_z = inference::mean(z);
        sm.var_z = inference::sample_variance(z);
        sm.coverage_pct = 100.0 * static_cast<double>(covered) / static_cast<double>(z.size());
        sm.ad = inference::anderson_darling(z);
      }
      outcome.records.insert(outcome.records.end(), records.begin(), records.end());
      outcome.summaries.push_back(sm);
    }

    // QQ data for the two largest sample sizes.
    auto sorted_sizes = cfg.clt.sample_sizes;
    std::sort(sorted_sizes.begin(), sorted_sizes.end());
    sorted_sizes.erase(std::unique(sorted_sizes.begin(), sorted_sizes.end()), sorted_sizes.end());
    const std::size_t first_qq = sorted_sizes.size() >= 2 ? sorted_sizes.size() - 2 : 0;
    for (std::size_t i = first_qq; i < sorted_sizes.size(); ++i) {
      const std::size_t m = sorted_sizes[i];
      std::vector<double> z;
      for (const auto& rec : outcome.records) {
        if (rec.sample_size == m && rec.applicable && rec.a_star == a_star) z.push_back(rec.z);
      }
      if (z.size() < 2) continue;
      Series pts{"sample quantiles", {}, {}, false};
      for (const auto& [theo, samp] : inference::qq_data(z)) {
        pts.x.push_back(theo);
        pts.y.push_back(samp);
      }
      Series diag{"y = x", {pts.x.front(), pts.x.back()}, {pts.x.front(), pts.x.back()}, true};
      const auto fig = tree.figures() / ("qq_" + s.label + "_M" + std::to_string(m) + ".svg");
      write_line_plot(fig, s.label + " QQ, M=" + std::to_string(m), "N(0,1) quantile", "Z quantile",
                      {pts, diag}, false, false);
      outcome.artifacts.figures.push_back(fig);
    }
  }
  outcome.artifacts.raw = {raw_path};

  const auto summary_path = tree.processed() / "clt_summary.csv";
  {
    csv::Writer table(summary_path, {"testbed", "M", "h", "applicable", "mean_z", "var_z",
                                     "coverage_pct", "ad_stat", "ad_crit", "ad_reject"});
    for (const auto& sm : outcome.summaries) {
      table << sm.testbed << sm.sample_size << sm.h << sm.applicable << sm.mean_z << sm.var_z
            << sm.coverage_pct << sm.ad.statistic << inference::kAndersonCritical5 << sm.ad.reject_5pct;
      table.end_row();
    }
  }
  outcome.artifacts.processed = {summary_path};
  write_manifest("clt", cfg, outcome.artifacts);
  return outcome;
}

// ------------------------------------------------------------------ edge --

EdgeOutcome run_edge(const config::ExperimentConfig& cfg) {
  if (cfg.testbeds.empty()) throw ConfigError("no testbed configured");
  if (cfg.edge.offsets.size() < 2) throw ConfigError("edge.offsets needs at least two times");
  const OutputTree tree{cfg.output_dir};
  EdgeOutcome outcome;
  const auto raw_path = tree.raw() / "edge.csv";
  csv::Writer raw(raw_path, {"testbed", "rep", "t", "delta_t", "h_hat", "sup_error", "scaled_error",
                             "ise", "floor_count"});

  for (Testbed tb : cfg.testbeds) {
    const Setup s = make_setup(cfg, tb, cfg.variant);
    const int d = s.law.dim();
    const auto base = truth_slice(s, s.query.t0);
    const auto base_floors = floors_for(s, base);
    std::vector<double> times;
    std::vector<truth::TruthCache> slices;
    std::vector<estimator::Floors> floors;
    for (double off : cfg.edge.offsets) {
      const double t = s.interval.u - off;
      if (!(t < s.interval.u) || t < s.interval.s) throw ConfigError("edge offsets must lie in (0, u - s]");
      times.push_back(t);
      slices.push_back(truth_slice(s, t));
      floors.push_back(floors_for(s, slices.back()));
    }
    const std::size_t m = cfg.edge.sample_size;
    const auto grid = bandwidth::build_grid(m, d, cfg.bandwidth.h0, cfg.bandwidth.ratio);
    const std::size_t reps = cfg.edge.repetitions;

    struct EdgeRep {
      double h_hat = 0.0;
      std::vector<double> err, ise;
      std::vector<std::size_t> floor_counts;
    };
    std::vector<EdgeRep> results(reps);
    parallel_for(reps, cfg.threads, [&](std::size_t r) {
      auto rng = rng::derive_stream(cfg.seed, {"edge", s.label, m, r});
      const auto sample = models::sample_dataset(s.law, m, rng);
      const auto sweep = bandwidth::evaluate_sweep(sample, s.interval, s.query.t0, s.query.xi0, s.xgrid,
                                                   grid, base_floors);
      const auto sel = bandwidth::gl_select(sweep, m, d, cfg.bandwidth.kappa_pair, cfg.bandwidth.kappa_final);
      EdgeRep& out = results[r];
      out.h_hat = sel.selected_h;
      for (std::size_t k = 0; k < times.size(); ++k) {
        const auto est = estimator::estimate_drift_grid(sample, s.interval, times[k], s.query.xi0, s.xgrid,
                                                        out.h_hat, floors[k]);
        out.err.push_back(bandwidth::sup_grid_error(est, slices[k]));
        out.ise.push_back(bandwidth::integrated_squared_error(est, slices[k]));
        out.floor_counts.push_back(count_floors(est));
      }
    });

    EdgeSummary sm;
    sm.testbed = s.label;
    sm.times = times;
    sm.repetitions = reps;
    sm.mean_error.assign(times.size(), 0.0);
    sm.mean_scaled_error.assign(times.size(), 0.0);
    std::size_t increasing = 0;
    std::size_t flatter = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& rep = results[r];
      std::vector<double> scaled;
      for (std::size_t k = 0; k < times.size(); ++k) {
        const double dt = s.interval.delta_at(times[k]);
        scaled.push_back(dt * rep.err[k]);
        raw << s.label << r << times[k] << dt << rep.h_hat << rep.err[k] << scaled.back() << rep.ise[k]
            << rep.floor_counts[k];
        raw.end_row();
        sm.mean_error[k] += rep.err[k] / static_cast<double>(reps);
        sm.mean_scaled_error[k] += scaled.back() / static_cast<double>(reps);
      }
      // Times are ordered by the configured offsets; compare the earliest and the latest.
      const auto earliest = std::distance(times.begin(), std::min_element(times.begin(), times.end()));
      const auto latest = std::distance(times.begin(), std::max_element(times.begin(), times.end()));
      if (rep.err[latest] > rep.err[earliest]) ++increasing;
      const auto [emin, emax] = std::minmax_element(rep.err.begin(), rep.err.end());
      const auto [smin, smax] = std::minmax_element(scaled.begin(), scaled.end());
      if (*smax / *smin < *emax / *emin) ++flatter;
    }
    sm.frac_increasing = static_cast<double>(increasing) / static_cast<double>(reps);
    sm.frac_flatter = static_cast<double>(flatter) / static_cast<double>(reps);
    outcome.summaries.push_back(sm);

    Series e{"E_inf(t)", times, sm.mean_error, false};
    Series se{"Delta(t) E_inf(t)", times, sm.mean_scaled_error, true};
    const auto fig = tree.figures() / ("edge_" + s.label + ".svg");
    write_line_plot(fig, s.label + " terminal edge", "t", "error", {e, se}, false, true);
    outcome.artifacts.figures.push_back(fig);
  }
  outcome.artifacts.raw = {raw_path};

  const auto summary_path = tree.processed() / "edge_summary.csv";
  {
    csv::Writer table(summary_path, {"testbed", "t", "delta_t", "mean_error", "mean_scaled_error",
                                     "frac_increasing", "frac_flatter", "repetitions"});
    for (const auto& sm : outcome.summaries) {
      for (std::size_t k = 0; k < sm.times.size(); ++k) {
        table << sm.testbed << sm.times[k] << cfg.interval.u - sm.times[k] << sm.mean_error[k]
              << sm.mean_scaled_error[k] << sm.frac_increasing << sm.frac_flatter << sm.repetitions;
        table.end_row();
      }
    }
  }
  outcome.artifacts.processed = {summary_path};
  write_manifest("edge", cfg, outcome.artifacts);
  return outcome;
}

// ---------------------------------------------------------------- stress --

StressOutcome run_stress(const config::ExperimentConfig& cfg) {
  if (cfg.testbeds.empty()) throw ConfigError("no testbed configured");
  const OutputTree tree{cfg.output_dir};
  StressOutcome outcome;
  const auto raw_path = tree.raw() / "stress.csv";
  csv::Writer raw(raw_path, {"testbed", "setting", "rep", "h_hat", "h_or", "err_hat", "err_or", "gamma",
                             "ise_hat", "var_wn", "var_wd", "dhat", "boundary_hit"});

  for (Testbed tb : cfg.testbeds) {
    if (tb != Testbed::GG1 && tb != Testbed::MM1) {
      throw ConfigError("the stress test is defined for GG1 and MM1 only");
    }
    struct StressRep {
      double h_hat = 0.0, h_or = 0.0, err_hat = 0.0, err_or = 0.0, gamma = 0.0, ise_hat = 0.0;
      double var_wn = 0.0, var_wd = 0.0, dhat = 0.0;
      bool boundary = false;
    };
    std::vector<std::vector<StressRep>> by_variant;
    std::vector<std::string> labels;
    for (Variant variant : {Variant::Compact, Variant::Wide}) {
      const Setup s = make_setup(cfg, tb, variant);
      const auto slice = truth_slice(s, s.query.t0);
      const auto floors = floors_for(s, slice);
      const std::size_t m = cfg.stress.sample_size;
      const int d = s.law.dim();
      const auto grid = bandwidth::build_grid(m, d, cfg.bandwidth.h0, cfg.bandwidth.ratio);
      const truth::Query query{s.query.t0, s.query.x0, s.query.xi0};
      std::vector<StressRep> results(cfg.stress.repetitions);
      parallel_for(results.size(), cfg.threads, [&](std::size_t r) {
        auto rng = rng::derive_stream(cfg.seed, {"stress", s.label, m, r});
        const auto sample = models::sample_dataset(s.law, m, rng);
        const auto sweep = bandwidth::evaluate_sweep(sample, s.interval, s.query.t0, s.query.xi0, s.xgrid,
                                                     grid, floors);
        const auto sel = bandwidth::gl_select(sweep, m, d, cfg.bandwidth.kappa_pair, cfg.bandwidth.kappa_final);
        const auto oracle = bandwidth::oracle_bandwidth(sweep, slice);
        StressRep& out = results[r];
        out.h_hat = sel.selected_h;
        out.h_or = oracle.h_or;
        out.err_hat = oracle.errors[sel.index];
        out.err_or = oracle.errors[oracle.index];
        out.gamma = safe_ratio(out.err_hat, out.err_or);
        out.ise_hat = bandwidth::integrated_squared_error(sweep.estimates[sel.index], slice);
        out.boundary = sel.boundary_hit;

        // Raw summands W^N, W^D over all m (zeros outside the kernel window included).
        const auto window = estimator::kernel_window(sample, s.query.xi0, out.h_hat);
        std::vector<double> wn(m, 0.0), wd(m, 0.0);
        for (std::size_t k = 0; k < window.index.size(); ++k) {
          const std::size_t i = window.index[k];
          const Vec y = sample.target_at(i);
          const double w = truth::sb_weight(s.interval, query.t, query.xi, query.x, y) * window.weight[k];
          wd[i] = w;
          wn[i] = y(0) * w;
        }
        out.var_wn = inference::sample_variance(wn);
        out.var_wd = inference::sample_variance(wd);
        const double fhat = window.fhat();
        out.dhat = fhat > 0.0 ? (inference::mean(wd) / fhat) : 0.0;
      });
      by_variant.push_back(std::move(results));
      labels.push_back(models::to_string(variant));
    }

    std::vector<double> compact_dhat;
    for (const auto& rep : by_variant[0]) compact_dhat.push_back(rep.dhat);
    const double tau = 0.25 * inference::median(compact_dhat);
    for (std::size_t v = 0; v < by_variant.size(); ++v) {
      const auto& reps = by_variant[v];
      StressSetting st;
      st.testbed = models::to_string(tb);
      st.setting = labels[v];
      st.tau_d = tau;
      std::vector<double> errs, ises;
      std::size_t below = 0;
      for (std::size_t r = 0; r < reps.size(); ++r) {
        const auto& rep = reps[r];
        raw << st.testbed << st.setting << r << rep.h_hat << rep.h_or << rep.err_hat << rep.err_or
            << rep.gamma << rep.ise_hat << rep.var_wn << rep.var_wd << rep.dhat << rep.boundary;
        raw.end_row();
        const double n = static_cast<double>(reps.size());
        st.mean_var_wn += rep.var_wn / n;
        st.mean_var_wd += rep.var_wd / n;
        st.mean_gamma += rep.gamma / n;
        st.mean_h_selected += rep.h_hat / n;
        st.boundary_rate += (rep.boundary ? 1.0 : 0.0) / n;
        below += rep.dhat <= tau ? 1 : 0;
        errs.push_back(rep.err_hat);
        ises.push_back(rep.ise_hat);
      }
      st.pr_dhat_below = static_cast<double>(below) / static_cast<double>(reps.size());
      st.median_sup_error = inference::median(errs);
      st.median_ise = inference::median(ises);
      outcome.settings.push_back(st);
    }
  }
  outcome.artifacts.raw = {raw_path};

  const auto summary_path = tree.processed() / "stress_summary.csv";
  {
    csv::Writer table(summary_path, {"testbed", "setting", "mean_var_wn", "mean_var_wd", "tau_d",
                                     "pr_dhat_below_tau", "median_sup_error", "median_ise", "mean_gamma",
                                     "mean_h_hat", "boundary_rate"});
    for (const auto& st : outcome.settings) {
      table << st.testbed << st.setting << st.mean_var_wn << st.mean_var_wd << st.tau_d << st.pr_dhat_below
            << st.median_sup_error << st.median_ise << st.mean_gamma << st.mean_h_selected
            << st.boundary_rate;
      table.end_row();
    }
  }
  outcome.artifacts.processed = {summary_path};
  write_manifest("stress", cfg, outcome.artifacts);
  return outcome;
}

}  // namespace sbdrift::experiments

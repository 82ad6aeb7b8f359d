// sbdrift: experiment driver CLI.
//
//   sbdrift <preflight|rate|clt|edge|stress> --config PATH [--out DIR] [--seed N] [--threads N]
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include "CLI11.hpp"

#include "sbdrift/config.hpp"
#include "sbdrift/experiments.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

namespace {

namespace ex = sbdrift::experiments;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config, "YAML experiment configuration")->required();
  sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
  sub->add_option("--seed", opt.seed, "master seed (overrides seed)");
  sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
}

void report(const std::string& name, const ex::RunArtifacts& a) {
  std::printf("%s: %zu raw, %zu processed, %zu figures\n", name.c_str(), a.raw.size(),
              a.processed.size(), a.figures.size());
  std::printf("manifest: %s\n", a.manifest.string().c_str());
}

void print_rate(const ex::RateOutcome& r) {
  for (const auto& s : r.summaries) {
    std::printf("%-10s theory %.6f", s.testbed.c_str(), s.theory_slope);
    if (s.oracle_slope) {
      std::printf("  oracle slope %.4f", *s.oracle_slope);
    } else {
      std::printf("  oracle slope n/a (insufficient points)");
    }
    std::printf("  C_avg %.3f  C_max %.3f  boundary %.3f\n", s.c_avg, s.c_max, s.boundary_avg);
  }
}

int run(const std::string& command, const Options& opt) {
  auto cfg = sbdrift::config::load(opt.config);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.threads) cfg.threads = *opt.threads;

  if (command == "preflight") {
    const auto r = ex::run_preflight(cfg);
    for (const auto& p : r.reports) {
      std::printf("%-10s f(xi0) %.7f  min f %.6e  min D* %.6e  truth err %.2e  %s\n",
                  p.testbed.c_str(), p.f_xi0, p.min_f_grid, p.min_dstar,
                  p.truth_error, p.passed() ? "ok" : "FAIL");
    }
    report(command, r.artifacts);
  } else if (command == "rate") {
    const auto r = ex::run_rate(cfg);
    print_rate(r);
    report(command, r.artifacts);
  } else if (command == "clt") {
    const auto r = ex::run_clt(cfg);
    for (const auto& s : r.summaries) {
      std::printf("%-10s M=%-6zu cover %.2f%%  mean Z %+.3f  var Z %.3f  AD %.3f%s\n", s.testbed.c_str(),
                  s.sample_size, s.coverage_pct, s.mean_z, s.var_z, s.ad.statistic,
                  s.ad.reject_5pct ? " (reject)" : "");
    }
    report(command, r.artifacts);
  } else if (command == "edge") {
    const auto r = ex::run_edge(cfg);
    for (const auto& s : r.summaries) {
      std::printf("%-10s increasing %.2f  flatter %.2f\n", s.testbed.c_str(), s.frac_increasing,
                  s.frac_flatter);
    }
    report(command, r.artifacts);
  } else if (command == "stress") {
    const auto r = ex::run_stress(cfg);
    for (const auto& s : r.settings) {
      std::printf("%-5s %-8s median E %.4f  Pr(D<=tau) %.2f  Gamma %.3f\n", s.testbed.c_str(),
                  s.setting.c_str(), s.median_sup_error, s.pr_dhat_below, s.mean_gamma);
    }
    report(command, r.artifacts);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel plug-in estimation of Schrodinger-bridge drifts"};
  app.require_subcommand(1);
  Options opt;
  const char* commands[][2] = {
      {"preflight", "density and truth-accuracy report per testbed"},
      {"rate", "bandwidth sweep, oracle and selected errors, rate slopes"},
      {"clt", "pointwise CLT coverage under undersmoothing"},
      {"edge", "error growth toward the terminal time"},
      {"stress", "compact versus wide support comparison"},
  };
  for (const auto& c : commands) add_common(app.add_subcommand(c[0], c[1]), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const sbdrift::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

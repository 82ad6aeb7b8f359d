#include "sbdrift/bandwidth.hpp"
#include "sbdrift/config.hpp"
#include "sbdrift/estimator.hpp"
#include "sbdrift/models.hpp"
#include "sbdrift/truth.hpp"

#include <benchmark/benchmark.h>

using namespace sbdrift;

namespace {

struct Fixture {
  models::PairLaw law;
  config::QueryPoint query;
  truth::IntervalSpec interval;
  std::vector<Vec> xgrid;

  explicit Fixture(models::Testbed tb) : law(models::make_law(tb)), query(config::default_query(tb)) {
    const auto g = config::default_eval_grid(law.dim());
    xgrid = truth::tensor_grid(law.dim(), g.lower, g.upper, g.points);
  }

  models::SampleSet sample(std::size_t m) const {
    Rng rng(7);
    return models::sample_dataset(law, m, rng);
  }
};

void BM_KernelWindow(benchmark::State& state) {
  const Fixture fx(models::Testbed::GG1);
  const auto s = fx.sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(estimator::kernel_window(s, fx.query.xi0, 0.2));
}
BENCHMARK(BM_KernelWindow)->Arg(1000)->Arg(8000);

void BM_DriftGrid(benchmark::State& state) {
  const Fixture fx(state.range(1) == 1 ? models::Testbed::GG1 : models::Testbed::GG2);
  const auto s = fx.sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        estimator::estimate_drift_grid(s, fx.interval, fx.query.t0, fx.query.xi0, fx.xgrid, 0.3));
  }
}
BENCHMARK(BM_DriftGrid)->Args({1000, 1})->Args({8000, 1})->Args({8000, 2});

void BM_GlSelect(benchmark::State& state) {
  const Fixture fx(models::Testbed::GG1);
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto s = fx.sample(m);
  const auto grid = bandwidth::build_grid(m, 1);
  for (auto _ : state) {
    const auto sweep = bandwidth::evaluate_sweep(s, fx.interval, fx.query.t0, fx.query.xi0, fx.xgrid, grid);
    benchmark::DoNotOptimize(bandwidth::gl_select(sweep, m, 1));
  }
}
BENCHMARK(BM_GlSelect)->Arg(4000);

void BM_TruthCache(benchmark::State& state) {
  const Fixture fx(state.range(0) == 1 ? models::Testbed::GG1 : models::Testbed::GG2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        truth::build_truth_cache(fx.law, fx.interval, fx.query.t0, fx.query.xi0, fx.xgrid));
  }
}
BENCHMARK(BM_TruthCache)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

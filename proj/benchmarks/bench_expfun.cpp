#include <benchmark/benchmark.h>

#include <cmath>

#include "expfun/exponent_model.hpp"
#include "expfun/moments.hpp"
#include "expfun/monte_carlo.hpp"
#include "expfun/quadrature.hpp"
#include "expfun/rng.hpp"
#include "expfun/special_functions.hpp"

namespace {

void BM_LogBesselSeries(benchmark::State& state) {
  double x = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(expfun::log_bessel_i(0.5, x));
    x = (x < 8.0) ? x + 1e-6 : 0.5;  // stay in the series regime
  }
}
BENCHMARK(BM_LogBesselSeries);

void BM_LogBesselAsymptotic(benchmark::State& state) {
  double x = 100.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(expfun::log_bessel_i(2.5, x));
    x = (x < 1e5) ? x + 1.0 : 100.0;
  }
}
BENCHMARK(BM_LogBesselAsymptotic);

void BM_IntegrateSmooth(benchmark::State& state) {
  expfun::QuadConfig cfg;
  for (auto _ : state) {
    auto res = expfun::integrate([](double x) { return std::exp(-x * x); },
                                 0.0, 4.0, cfg);
    benchmark::DoNotOptimize(res.value);
  }
}
BENCHMARK(BM_IntegrateSmooth);

void BM_IntegrateSemiInfinite(benchmark::State& state) {
  expfun::QuadConfig cfg;
  for (auto _ : state) {
    auto res = expfun::integrate_to_infinity(
        [](double x) { return std::exp(-2.0 * x); }, 0.0, cfg,
        expfun::TailDecay::exponential(2.0));
    benchmark::DoNotOptimize(res.value);
  }
}
BENCHMARK(BM_IntegrateSemiInfinite);

void BM_MomentRecursive(benchmark::State& state) {
  const auto model = expfun::brownian_drift(6.0, 2.0);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    expfun::MomentQuery q;
    q.n = n;
    q.t = 1.0;
    q.method = expfun::MomentMethod::Recursive;
    auto res = expfun::moment_recursive(model, q);
    benchmark::DoNotOptimize(res.value);
  }
}
BENCHMARK(BM_MomentRecursive)->Arg(1)->Arg(2)->Arg(3);

void BM_MomentProduct(benchmark::State& state) {
  const auto model = expfun::brownian_drift(6.0, 2.0);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    expfun::MomentQuery q;
    q.n = n;
    q.method = expfun::MomentMethod::Product;
    auto res = expfun::moment_product(model, q);
    benchmark::DoNotOptimize(res.value);
  }
}
BENCHMARK(BM_MomentProduct)->Arg(1)->Arg(2);

void BM_PhiloxUniform(benchmark::State& state) {
  expfun::PhiloxRng rng(1234, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rng.uniform());
  }
}
BENCHMARK(BM_PhiloxUniform);

void BM_BrownianPaths(benchmark::State& state) {
  expfun::SimConfig cfg;
  cfg.paths = 128;
  cfg.dt = 1e-2;
  cfg.horizon = 5.0;
  cfg.seed = 99;
  for (auto _ : state) {
    auto est = expfun::simulate_brownian_drift_functional(
        6.0, 2.0, 1, std::numeric_limits<double>::infinity(), cfg);
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * cfg.paths);
}
BENCHMARK(BM_BrownianPaths);

}  // namespace

BENCHMARK_MAIN();

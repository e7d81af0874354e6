#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "tailchain/condext.hpp"
#include "tailchain/engine.hpp"

using namespace tailchain;

namespace {

const PreparedData& data() {
  static const PreparedData d = [] {
    SyntheticSpec spec;
    spec.n = 60000;
    return prepare_data(generate_synthetic(spec));
  }();
  return d;
}

ResidualSample residuals(std::size_t n, std::size_t dim) {
  Rng rng(1);
  std::vector<double> z(n * dim);
  for (auto& v : z) v = standard_normal(rng);
  return ResidualSample::with_reference_bandwidth(n, dim, std::move(z));
}

void BM_KdeConditionalSample(benchmark::State& state) {
  const auto r = residuals(static_cast<std::size_t>(state.range(0)), 5);
  const std::vector<double> given{0.3, -0.2, 0.1};
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(kde_conditional_sample(r, given, rng));
}
BENCHMARK(BM_KdeConditionalSample)->Arg(500)->Arg(2000)->Arg(8000);

void BM_FitConditional(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> y, w;
  for (int i = 0; i < state.range(0); ++i) {
    y.push_back(2.0 + std::exponential_distribution<double>{}(rng));
    w.push_back(0.7 * y.back() + std::pow(y.back(), 0.3) * standard_normal(rng));
  }
  const auto p = ht_problem(y, w, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(fit_conditional(p));
}
BENCHMARK(BM_FitConditional)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_SimulateExcursion(benchmark::State& state) {
  const auto& d = data();
  ModelOptions o;
  o.family = state.range(0) == 0 ? Family::mmem : Family::evar;
  o.k = static_cast<int>(state.range(1));
  const auto m = fit_excursion_model(d.excursions, d.hs_margin, d.ws_margin, d.u, o);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_excursion(m, rng));
}
BENCHMARK(BM_SimulateExcursion)->ArgsProduct({{0, 1}, {1, 3}})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

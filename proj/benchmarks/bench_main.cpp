#include "cfeval/approaches.hpp"
#include "cfeval/metrics.hpp"
#include "cfeval/rng.hpp"
#include "cfeval/sir.hpp"
#include "cfeval/spline.hpp"
#include "cfeval/world.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

void BM_FinalSize(benchmark::State &state) {
    cfeval::sir::SirParams p{.r0 = 2.5, .alpha = 0.975, .v = 0.4};
    for (auto _ : state) benchmark::DoNotOptimize(cfeval::sir::final_size(p));
}
BENCHMARK(BM_FinalSize);

void BM_SplineFit(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    cfeval::Stream s{1};
    std::vector<double> x(n), y(n), r0(n);
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = s.uniform(0.3, 0.5);
        r0[k] = s.uniform(2, 3);
        y[k] = x[k] * x[k] + 0.1 * r0[k] + s.normal(0, 0.01);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            cfeval::spline::fit(x, y, std::span<const double>{r0}, {.include_covariate = true}));
    }
}
BENCHMARK(BM_SplineFit)->Arg(50)->Arg(500);

void BM_KsTwoSample(benchmark::State &state) {
    cfeval::Stream s{2};
    std::vector<double> a(500000), b(50);
    for (double &v : a) v = s.normal(0, 1);
    for (double &v : b) v = s.normal(0.1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(cfeval::metrics::ks_two_sample(a, b));
}
BENCHMARK(BM_KsTwoSample)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State &state) {
    cfeval::ExperimentConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(cfeval::generate(config));
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

void BM_Approach3Covariate(benchmark::State &state) {
    cfeval::ExperimentConfig config;
    const auto ex = cfeval::generate(config);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfeval::approach3(ex.world, ex.ensemble, {}));
    }
}
BENCHMARK(BM_Approach3Covariate)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();

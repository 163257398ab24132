#include <benchmark/benchmark.h>

#include "rrglab/matrix.hpp"
#include "rrglab/spectral.hpp"

namespace {

void BM_SampleConstrainedGoe(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    rrglab::RngStream rng(11, 0);
    for (auto _ : state) benchmark::DoNotOptimize(rrglab::sample_constrained_goe(n, rng));
}
BENCHMARK(BM_SampleConstrainedGoe)->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const bool vectors = state.range(1) != 0;
    rrglab::RngStream rng(5, 0);
    const auto h = rrglab::sample_constrained_goe(n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(rrglab::decompose(h, vectors));
}
BENCHMARK(BM_Decompose)->Args({500, 0})->Args({500, 1})->Args({1000, 0})->Unit(benchmark::kMillisecond);

void BM_StieltjesEmpirical(benchmark::State& state) {
    rrglab::RngStream rng(9, 0);
    const auto spec = rrglab::decompose(rrglab::sample_constrained_goe(1000, rng), false);
    for (auto _ : state) benchmark::DoNotOptimize(rrglab::stieltjes_empirical(spec, {0.0, 0.05}));
}
BENCHMARK(BM_StieltjesEmpirical);

}  // namespace

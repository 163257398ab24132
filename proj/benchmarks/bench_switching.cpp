#include <benchmark/benchmark.h>

#include "rrglab/dbm.hpp"
#include "rrglab/graph.hpp"
#include "rrglab/matrix.hpp"
#include "rrglab/observable.hpp"
#include "rrglab/switching.hpp"

namespace {

void BM_EdgePairStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int d = static_cast<int>(state.range(1));
    rrglab::RngStream rng(7, 0);
    rrglab::RegularGraph g = rrglab::sample_initial(n, d, rng);
    std::int64_t accepted = 0;
    for (auto _ : state) accepted += rrglab::edge_pair_step(g, rng);
    state.counters["accept_rate"] = static_cast<double>(accepted) / static_cast<double>(state.iterations());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EdgePairStep)->Args({1000, 32})->Args({2000, 40});

void BM_SampleInitial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int d = static_cast<int>(state.range(1));
    std::uint64_t trial = 0;
    for (auto _ : state) {
        auto g = rrglab::sample_initial(n, d, trial++);
        benchmark::DoNotOptimize(g);
    }
}
BENCHMARK(BM_SampleInitial)->Args({1000, 32})->Unit(benchmark::kMillisecond);

void BM_QApplyStieltjes(benchmark::State& state) {
    const int n = 32;
    const int d = static_cast<int>(state.range(0));
    const auto g = rrglab::sample_initial(n, d, 3);
    const auto f = rrglab::stieltjes_observable({0.0, 0.5});
    for (auto _ : state) benchmark::DoNotOptimize(rrglab::q_apply_observable(*f, g));
}
BENCHMARK(BM_QApplyStieltjes)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

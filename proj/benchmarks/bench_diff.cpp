#include "rca/diff.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>

namespace {

std::string script(std::size_t lines, unsigned seed, double change) {
    std::mt19937 rng(seed);
    std::bernoulli_distribution edit(change);
    std::string out;
    for (std::size_t i = 0; i < lines; ++i) {
        out += edit(rng) ? "    value = compute(" + std::to_string(rng() % 1000) + ")\n"
                         : "    line_" + std::to_string(i) + " = step(x)\n";
    }
    return out;
}

void BM_DiffStats(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = script(n, 1, 0.0);
    const auto b = script(n, 2, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(rca::diff_stats(a, b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DiffStats)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_UnifiedDiff(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = script(n, 1, 0.0);
    const auto b = script(n, 2, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(rca::unified_diff(a, b, "a.py", "b.py"));
}
BENCHMARK(BM_UnifiedDiff)->Arg(256)->Arg(2048);

}  // namespace

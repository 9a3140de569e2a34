#include "rca/actions.hpp"
#include "rca/constraints.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

void BM_PoolStreakCheck(benchmark::State& state) {
    const auto& registry = rca::ActionRegistry::instance();
    const auto list = rca::parse_invocation(registry.lookup("List Files"), "{\"directory path\": \".\"}");
    std::vector<rca::ActionInvocation> history(static_cast<std::size_t>(state.range(0)), list);
    const rca::PoolPolicy policy;
    long step = 0;
    for (auto _ : state) benchmark::DoNotOptimize(rca::check_pool_streak(policy, history, list, step++ % 500));
}
BENCHMARK(BM_PoolStreakCheck)->Arg(10)->Arg(1000);

void BM_DuplicateCheck(benchmark::State& state) {
    const auto& registry = rca::ActionRegistry::instance();
    std::vector<rca::ActionInvocation> history;
    for (long i = 0; i < state.range(0); ++i) {
        history.push_back(parse_invocation(registry.lookup("List Files"),
                                           "{\"directory path\": \"d" + std::to_string(i) + "\"}"));
    }
    const auto candidate = rca::parse_invocation(registry.lookup("List Files"), "{\"directory path\": \"new\"}");
    for (auto _ : state) benchmark::DoNotOptimize(rca::check_duplicate(history, candidate));
}
BENCHMARK(BM_DuplicateCheck)->Arg(10)->Arg(1000);

}  // namespace

#include "rca/actions.hpp"
#include "rca/executor.hpp"
#include "rca/response.hpp"

#include <benchmark/benchmark.h>

#include <string>

namespace {

void BM_ParsePlannerResponse(benchmark::State& state) {
    std::string text = "Reflection: ";
    text += std::string(static_cast<std::size_t>(state.range(0)), 'r');
    text += "\nResearch Plan and Status:\n1. read files\n2. edit\nFact Check: none\nThought: look\n"
            "Action: List Files\nAction Input: {\"directory path\": \".\"}\n";
    for (auto _ : state) benchmark::DoNotOptimize(rca::parse_planner_response(text));
}
BENCHMARK(BM_ParsePlannerResponse)->Arg(100)->Arg(10000);

void BM_ParseInvocation(benchmark::State& state) {
    const auto& spec = rca::ActionRegistry::instance().lookup("Edit Script");
    const std::string block =
        "```json\n{\"script name\": \"train.py\", \"edit instructions\": \"replace the loss with focal loss\", "
        "\"save script name\": \"train_v2.py\"}\n```";
    for (auto _ : state) benchmark::DoNotOptimize(rca::parse_invocation(spec, block));
}
BENCHMARK(BM_ParseInvocation);

void BM_ParseCover(benchmark::State& state) {
    std::string cover;
    for (long i = 0; i < state.range(0); ++i) {
        cover += i % 3 ? "    5:     x = step(x)\n" : i % 7 ? "       def helper():\n" : ">>>>>> raise Error\n";
    }
    for (auto _ : state) benchmark::DoNotOptimize(rca::parse_cover_text(cover));
}
BENCHMARK(BM_ParseCover)->Arg(200)->Arg(5000);

}  // namespace

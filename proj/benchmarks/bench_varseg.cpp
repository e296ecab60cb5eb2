#include <benchmark/benchmark.h>

#include "varseg/pipeline.hpp"
#include "varseg/simulate.hpp"

using namespace varseg;

namespace {

TimeSeries scaled_s1(std::uint64_t seed)
{
    const TimeSeries y = simulate(make_scenario(Scenario::kCenter, seed));
    return y / rms_scale(y);
}

} // namespace

static void BM_BuildStage1(benchmark::State& state)
{
    const TimeSeries y = scaled_s1(1);
    for (auto _ : state) benchmark::DoNotOptimize(build_stage1(y, 1));
}
BENCHMARK(BM_BuildStage1)->Unit(benchmark::kMillisecond);

static void BM_BcdSolveS1(benchmark::State& state)
{
    const auto prob = build_stage1(scaled_s1(1), 1);
    const auto sched = detection_schedule(300, 20, 1);
    for (auto _ : state) benchmark::DoNotOptimize(bcd_solve(prob, sched.lambda_n));
}
BENCHMARK(BM_BcdSolveS1)->Unit(benchmark::kMillisecond);

static void BM_FitSegment(benchmark::State& state)
{
    const TimeSeries y = scaled_s1(1);
    const auto sched = detection_schedule(300, 20, 1);
    const SegmentRange range{1, 1 + static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(fit_segment(y, range, 1, sched.eta_n));
}
BENCHMARK(BM_FitSegment)->Arg(50)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_DetectS1(benchmark::State& state)
{
    const TimeSeries y = simulate(make_scenario(Scenario::kCenter, 1));
    const auto sched = detection_schedule(300, 20, 1);
    for (auto _ : state) benchmark::DoNotOptimize(detect(y, 1, sched));
}
BENCHMARK(BM_DetectS1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

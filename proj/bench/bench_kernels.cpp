#include <benchmark/benchmark.h>

#include <vector>

#include "lanecrit/criticality.hpp"
#include "lanecrit/lc_detect.hpp"
#include "lanecrit/robustness.hpp"
#include "lanecrit/sim_w99.hpp"
#include "lanecrit/synth.hpp"
#include "lanecrit/traj_core.hpp"

using namespace lanecrit;

namespace {

const SyntheticCorpus& corpus() {
    static const SyntheticCorpus c = synthesize(SynthParams{});
    return c;
}

const std::vector<Trajectory>& prepared() {
    static const std::vector<Trajectory> p = preprocess(corpus().trajectories, 5.0, 1.3, LaneLayout{});
    return p;
}

const std::vector<LaneChangeEvent>& peak_events() {
    static const std::vector<LaneChangeEvent> e =
        detect_all(prepared(), Criterion::peak, LaneLayout{}, DetectParams{});
    return e;
}

template <bool Parallel>
void BM_Preprocess(benchmark::State& st) {
    const LaneLayout layout;
    for (auto _ : st) {
        auto out = Parallel ? preprocess(corpus().trajectories, 5.0, 1.3, layout)
                            : preprocess_serial(corpus().trajectories, 5.0, 1.3, layout);
        benchmark::DoNotOptimize(out);
    }
}

template <bool Parallel>
void BM_DetectAll(benchmark::State& st) {
    const LaneLayout layout;
    const DetectParams dp;
    for (auto _ : st) {
        auto out = Parallel ? detect_all(prepared(), Criterion::peak, layout, dp)
                            : detect_all_serial(prepared(), Criterion::peak, layout, dp);
        benchmark::DoNotOptimize(out);
    }
}

template <bool Parallel>
void BM_Sweep(benchmark::State& st) {
    const SweepConfig sc;
    const auto prep = prepare_corpus(corpus().trajectories, sc);
    const auto grid = default_brownian_grid(7);
    const std::size_t truth = gradient_ground_truth(prep, sc);
    for (auto _ : st) {
        auto out = Parallel ? sweep(prep, Criterion::peak, grid, sc, truth)
                            : sweep_serial(prep, Criterion::peak, grid, sc, truth);
        benchmark::DoNotOptimize(out);
    }
}

template <bool Parallel>
void BM_EvaluateEvents(benchmark::State& st) {
    const LaneLayout layout;
    const Thresholds th;
    for (auto _ : st) {
        auto out = Parallel ? evaluate_events(prepared(), peak_events(), layout, th)
                            : evaluate_events_serial(prepared(), peak_events(), layout, th);
        benchmark::DoNotOptimize(out);
    }
}

template <bool Parallel>
void BM_SampleCc1(benchmark::State& st) {
    const ScenarioSpec spec = overtaking_fixture();
    const std::vector<double> cc1{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
    const LaneLayout layout;
    for (auto _ : st) {
        auto out = Parallel ? sample_cc1(spec, cc1, layout) : sample_cc1_serial(spec, cc1, layout);
        benchmark::DoNotOptimize(out);
    }
}

}  // namespace

BENCHMARK(BM_Preprocess<false>)->Name("preprocess/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Preprocess<true>)->Name("preprocess/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DetectAll<false>)->Name("detect_all/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DetectAll<true>)->Name("detect_all/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Sweep<false>)->Name("sweep/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Sweep<true>)->Name("sweep/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EvaluateEvents<false>)->Name("evaluate_events/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EvaluateEvents<true>)->Name("evaluate_events/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SampleCc1<false>)->Name("sample_cc1/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SampleCc1<true>)->Name("sample_cc1/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "segtopics/metrics.hpp"
#include "segtopics/random.hpp"

using namespace segtopics;

namespace {

Segmentation random_segmentation(Rng& rng, int n, double rate) {
    std::vector<int> gaps;
    for (int g = 1; g < n; ++g) {
        if (rng.uniform() < rate) {
            gaps.push_back(g);
        }
    }
    return Segmentation(n, std::move(gaps));
}

void BM_Pk(benchmark::State& state) {
    Rng rng(1);
    const int n = static_cast<int>(state.range(0));
    const Segmentation ref = random_segmentation(rng, n, 0.05);
    const Segmentation hyp = random_segmentation(rng, n, 0.05);
    const int k = compute_k(ref);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pk(ref, hyp, k));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_Pk)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity(benchmark::oN);

void BM_WinDiff(benchmark::State& state) {
    Rng rng(2);
    const int n = static_cast<int>(state.range(0));
    const Segmentation ref = random_segmentation(rng, n, 0.05);
    const Segmentation hyp = random_segmentation(rng, n, 0.05);
    const int k = compute_k(ref);
    for (auto _ : state) {
        benchmark::DoNotOptimize(windiff(ref, hyp, k));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_WinDiff)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity(benchmark::oN);

void BM_PurityCoverage(benchmark::State& state) {
    Rng rng(3);
    const int n = static_cast<int>(state.range(0));
    const BlockTimeline timeline = unit_timeline(n);
    const TimedSegmentation ref = labels_to_timed(random_segmentation(rng, n, 0.05), timeline);
    const TimedSegmentation hyp = labels_to_timed(random_segmentation(rng, n, 0.05), timeline);
    for (auto _ : state) {
        benchmark::DoNotOptimize(purity_coverage(ref, hyp));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_PurityCoverage)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity(benchmark::oN);

} // namespace

#include <benchmark/benchmark.h>

#include "segtopics/synth.hpp"
#include "segtopics/texttiling.hpp"

using namespace segtopics;

namespace {

void BM_TextTile(benchmark::State& state) {
    const SynthText text = synth_text(1, static_cast<int>(state.range(0)), 4, 200);
    for (auto _ : state) {
        benchmark::DoNotOptimize(texttile(text.text));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 4);
}
BENCHMARK(BM_TextTile)->Arg(400)->Arg(4000)->Arg(40000)->Unit(benchmark::kMillisecond);

} // namespace

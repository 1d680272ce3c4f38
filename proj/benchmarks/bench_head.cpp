#include <benchmark/benchmark.h>

#include "segtopics/model.hpp"
#include "segtopics/random.hpp"

using namespace segtopics;

namespace {

ContextSequence random_context(int n, int d) {
    Rng rng(4);
    Matrix z(n, d);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z.data()[i] = rng.normal();
    }
    return build_context(z);
}

// Args: blocks, input width, model width.
HeadConfig config_for(const benchmark::State& state) {
    HeadConfig c;
    c.input_dim = static_cast<int>(state.range(1));
    c.model_dim = static_cast<int>(state.range(2));
    return c;
}

void BM_HeadForward(benchmark::State& state) {
    const HeadModel model = HeadModel::initialize(config_for(state), 1);
    const ContextSequence ctx = random_context(static_cast<int>(state.range(0)), model.config.input_dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(head_forward(ctx, model));
    }
}
BENCHMARK(BM_HeadForward)->Args({32, 32, 64})->Args({32, 1024, 256})->Args({128, 1024, 256})->Unit(benchmark::kMillisecond);

void BM_HeadBackward(benchmark::State& state) {
    const HeadModel model = HeadModel::initialize(config_for(state), 1);
    const int n = static_cast<int>(state.range(0));
    const ContextSequence ctx = random_context(n, model.config.input_dim);
    std::vector<int> gaps;
    for (int g = 8; g < n; g += 8) {
        gaps.push_back(g);
    }
    const Segmentation target(n, gaps);
    Rng dropout(5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(head_backward(ctx, model, target, &dropout));
    }
}
BENCHMARK(BM_HeadBackward)->Args({32, 32, 64})->Args({32, 1024, 256})->Args({128, 1024, 256})->Unit(benchmark::kMillisecond);

} // namespace

#include <benchmark/benchmark.h>

#include "latefusion/random.hpp"
#include "latefusion/verifier.hpp"

using namespace latefusion;

namespace {

Dataset random_set(std::size_t n)
{
    Rng rng(5);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        TrainingSample s;
        s.features = FeatureVector(FeatureLayout::Single11);
        for (auto &v : s.features.values())
            v = rng.uniform();
        s.label = int(rng.below(2));
        d.samples.push_back(s);
    }
    return d;
}

} // namespace

static void BM_Forward(benchmark::State &state)
{
    const MlpModel m = init_model(FeatureLayout::Single11, 64, 1);
    const Dataset d = random_set(256);
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(forward(m, d.samples[i++ & 255].features));
}
BENCHMARK(BM_Forward);

static void BM_Backward(benchmark::State &state)
{
    const MlpModel m = init_model(FeatureLayout::Single11, 64, 1);
    const Dataset d = random_set(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(backward(m, std::span<const TrainingSample>(d.samples), 10.0, 1.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Backward)->Arg(8)->Arg(256);

static void BM_TrainEpoch(benchmark::State &state)
{
    const Dataset d = random_set(2000);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(train(d, cfg));
}
BENCHMARK(BM_TrainEpoch)->Arg(8)->Arg(256)->Unit(benchmark::kMillisecond);

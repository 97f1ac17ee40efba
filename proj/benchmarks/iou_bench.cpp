#include <benchmark/benchmark.h>

#include <vector>

#include "latefusion/geometry.hpp"
#include "latefusion/matching.hpp"
#include "latefusion/random.hpp"

using namespace latefusion;

static std::vector<Detection> random_dets(std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Detection> out(n);
    for (auto &d : out) {
        const double x = rng.uniform(0, 1100), y = rng.uniform(0, 300);
        d.box = Box2D(x, y, x + rng.uniform(20, 140), y + rng.uniform(15, 70));
        d.score = rng.uniform();
    }
    return out;
}

static void BM_Iou(benchmark::State &state)
{
    const auto dets = random_dets(1024, 1);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(iou(dets[i & 1023].box, dets[(i * 7 + 3) & 1023].box));
        ++i;
    }
}
BENCHMARK(BM_Iou);

static void BM_MatchCamera(benchmark::State &state)
{
    const auto lidar = random_dets(64, 2);
    const auto cams = random_dets(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state)
        for (const auto &l : lidar)
            benchmark::DoNotOptimize(match_camera(l, cams, 0.5));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lidar.size()));
}
BENCHMARK(BM_MatchCamera)->Arg(4)->Arg(16)->Arg(64);

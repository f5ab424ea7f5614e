#include "growseg/growcut.hpp"
#include "growseg/prng.hpp"
#include "growseg/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace growseg;

namespace {

// Tiled image with 6 regions and a handful of single-pixel seeds per region.
struct Scene {
    MultiBandRaster features;
    SeedSet seeds;
};

Scene make_scene(int side) {
    Prng prng(42);
    const auto spec = random_tiling_spec(prng, side, side, 4, 6, 6.0, 30.0, 40.0, side / 8);
    const auto img = generate_synthetic(spec);
    const MultiBandRaster norm = normalize_bands(img.raster);
    Band ndvi_band(side, side);
    Scene s{assemble_features(norm, ndvi_band), SeedSet{side, side, {}}};
    for (int i = 0; i < 24; ++i) {
        const int x = static_cast<int>(prng.below(side));
        const int y = static_cast<int>(prng.below(side));
        SeedRegion r;
        r.id = i + 1;
        r.pixels = {{x, y}};
        r.cluster_label = img.truth.at(x, y) - 1;
        s.seeds.regions.push_back(r);
    }
    return s;
}

void run_engine(benchmark::State& state, Engine engine) {
    const int side = static_cast<int>(state.range(0));
    GrowCutParams params;
    params.threads = static_cast<unsigned>(state.range(1));
    const Scene scene = make_scene(side);
    std::size_t visited = 0;
    int iterations = 0;
    for (auto _ : state) {
        auto automaton = init_automaton(scene.features, scene.seeds, params);
        const auto result = run(automaton, params, engine);
        visited = result.visited_cells;
        iterations = result.iterations;
        benchmark::DoNotOptimize(result.labels.data.data());
    }
    state.counters["generations"] = iterations;
    state.counters["visited"] = static_cast<double>(visited);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(visited));
}

void BM_GrowCutSynchronous(benchmark::State& state) { run_engine(state, Engine::synchronous); }
void BM_GrowCutActiveSet(benchmark::State& state) { run_engine(state, Engine::active_set); }

}  // namespace

BENCHMARK(BM_GrowCutSynchronous)
    ->ArgsProduct({{64, 128, 256}, {1, 4}})
    ->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GrowCutActiveSet)
    ->ArgsProduct({{64, 128, 256}, {1, 4}})
    ->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

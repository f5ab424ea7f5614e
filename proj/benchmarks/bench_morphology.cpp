#include "growseg/morphology.hpp"
#include "growseg/prng.hpp"

#include <benchmark/benchmark.h>

using namespace growseg;

namespace {

Band noise_band(int side) {
    Prng prng(7);
    Band b(side, side);
    for (double& v : b.data) v = prng.uniform();
    return b;
}

void BM_ErodeSquare(benchmark::State& state) {
    const Band b = noise_band(256);
    const auto se = StructuringElement::square(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(erode(b, se).data.data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.size()));
}

void BM_ErodeByOffsets(benchmark::State& state) {
    const Band b = noise_band(256);
    const auto se = StructuringElement::square(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(detail::erode_by_offsets(b, se).data.data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.size()));
}

void BM_Asf(benchmark::State& state) {
    const Band b = noise_band(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(asf(b, 2).data.data());
}

void BM_MultiscaleGradient(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Prng prng(3);
    std::vector<double> data(static_cast<std::size_t>(side) * side * 4);
    for (double& v : data) v = prng.uniform();
    const MultiBandRaster r(side, side, 4, std::move(data));
    const auto threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(multiscale_gradient(r, 2, threads).data.data());
}

void BM_RegionalMinima(benchmark::State& state) {
    const Band b = noise_band(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(regional_minima(b, 64).data.data());
}

}  // namespace

BENCHMARK(BM_ErodeSquare)->DenseRange(1, 4);
BENCHMARK(BM_ErodeByOffsets)->DenseRange(1, 4);
BENCHMARK(BM_Asf)->Arg(128)->Arg(512);
BENCHMARK(BM_MultiscaleGradient)->ArgsProduct({{128, 512}, {1, 4}})->UseRealTime();
BENCHMARK(BM_RegionalMinima)->Arg(128)->Arg(512);

BENCHMARK_MAIN();

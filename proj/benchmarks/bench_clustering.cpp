#include "growseg/clustering.hpp"

#include <benchmark/benchmark.h>

using namespace growseg;

namespace {

std::vector<Descriptor> blobs(std::size_t n, std::size_t dim, int centres) {
    Prng prng(11);
    std::vector<Descriptor> centre(centres, Descriptor(dim));
    for (auto& c : centre)
        for (double& v : c) v = prng.uniform();
    std::vector<Descriptor> out(n, Descriptor(dim));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d)
            out[i][d] = centre[i % centres][d] + 0.02 * (prng.uniform() - 0.5);
    return out;
}

void BM_BestOfRestarts(benchmark::State& state) {
    const auto xs = blobs(static_cast<std::size_t>(state.range(0)), 5, 20);
    const auto threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) {
        const auto r = best_of_restarts(xs, 20, 10, Prng(1), 100, threads);
        benchmark::DoNotOptimize(r.inertia);
    }
}

}  // namespace

BENCHMARK(BM_BestOfRestarts)->ArgsProduct({{200, 2000}, {1, 4}})->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

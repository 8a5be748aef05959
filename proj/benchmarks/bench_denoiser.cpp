// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "reprodiff/dataset.hpp"
#include "reprodiff/denoiser.hpp"
#include "reprodiff/experiments.hpp"

using namespace reprodiff;

namespace {

// Argument: dataset size. Images are 32x32x3.
void BM_EpsilonStar(benchmark::State& state) {
    const Shape shape{32, 32, 3};
    const OptimalDenoiser den(make_synthetic_dataset(1, static_cast<std::size_t>(state.range(0)), shape), Schedule{});
    const Image x = seeded_noises(den.schedule(), shape, 3, 0, 1)[0];
    for (auto _ : state) benchmark::DoNotOptimize(den.epsilon_star(x, 0.5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EpsilonStar)->RangeMultiplier(4)->Range(16, 1024);

void BM_PosteriorVjp(benchmark::State& state) {
    const Shape shape{32, 32, 3};
    const OptimalDenoiser den(make_synthetic_dataset(1, static_cast<std::size_t>(state.range(0)), shape), Schedule{});
    const auto probes = seeded_noises(den.schedule(), shape, 3, 0, 2);
    for (auto _ : state) benchmark::DoNotOptimize(den.posterior_cov_vjp(probes[0], 0.5, probes[1]));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PosteriorVjp)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace

BENCHMARK_MAIN();

// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "reprodiff/dataset.hpp"
#include "reprodiff/denoiser.hpp"
#include "reprodiff/experiments.hpp"
#include "reprodiff/inverse.hpp"
#include "reprodiff/sampler.hpp"

using namespace reprodiff;

namespace {

const Shape kShape{8, 8, 3};

const OptimalDenoiser& memorizing_denoiser() {
    static const OptimalDenoiser den(make_synthetic_dataset(1, 64, kShape), Schedule{});
    return den;
}

void run_generate(benchmark::State& state, const SamplerConfig& cfg) {
    const auto& den = memorizing_denoiser();
    const Image x_T = seeded_noises(den.schedule(), kShape, 42, 0, 1)[0];
    for (auto _ : state) benchmark::DoNotOptimize(generate(den, x_T, cfg));
}

void BM_GenerateEuler512(benchmark::State& state) { run_generate(state, SamplerConfig::euler(512)); }
void BM_GenerateHeun64(benchmark::State& state) { run_generate(state, SamplerConfig::heun2(64)); }
void BM_GenerateExpInt3x32(benchmark::State& state) { run_generate(state, SamplerConfig::exp_int(3, 32)); }
BENCHMARK(BM_GenerateEuler512);
BENCHMARK(BM_GenerateHeun64);
BENCHMARK(BM_GenerateExpInt3x32);

void BM_Encode(benchmark::State& state) {
    const auto& den = memorizing_denoiser();
    const Image& x0 = den.dataset()[0];
    const SamplerConfig cfg = SamplerConfig::heun2(128);
    for (auto _ : state) benchmark::DoNotOptimize(encode(den, x0, cfg));
}
BENCHMARK(BM_Encode);

// Argument: worker threads for a batch of 64 trajectories.
void BM_GenerateBatch(benchmark::State& state) {
    const auto& den = memorizing_denoiser();
    const auto noises = seeded_noises(den.schedule(), kShape, 42, 0, 64);
    const SamplerConfig cfg = SamplerConfig::heun2(64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_batch(den, noises, cfg, static_cast<std::size_t>(state.range(0))));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_GenerateBatch)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

void BM_DpsInpaint(benchmark::State& state) {
    const Shape shape{32, 32, 3};
    const OptimalDenoiser den(make_synthetic_dataset(1, 64, shape), Schedule{});
    const Observation obs = apply_mask(den.dataset()[0], InpaintMask::preset("easy", 32, 32));
    const Image eps = seeded_noises(den.schedule(), shape, 42, 0, 1)[0];
    const DpsConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(dps_inpaint(den, obs, eps, cfg));
}
BENCHMARK(BM_DpsInpaint);

}  // namespace

BENCHMARK_MAIN();

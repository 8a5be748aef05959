// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "reprodiff/dataset.hpp"
#include "reprodiff/denoiser.hpp"
#include "reprodiff/metrics.hpp"
#include "reprodiff/rng.hpp"
#include "reprodiff/sampler.hpp"

namespace reprodiff {

struct HyperplaneGrid {
    std::size_t resolution = 100;  // points per axis
    double alpha_lo = -0.1;
    double alpha_hi = 1.1;
    double beta_lo = -0.1;
    double beta_hi = 1.1;

    [[nodiscard]] double alpha(std::size_t i) const noexcept;
    [[nodiscard]] double beta(std::size_t j) const noexcept;
};

struct HyperplaneCell {
    double alpha = 0.0;
    double beta = 0.0;
    int anchor = 0;  // 1, 2 or 3
    double similarity = 0.0;
};

/// Classification of the images generated over the noise plane
///   eps(alpha, beta) = eps1 + alpha (eps2 - eps1) + beta (eps3 - eps1).
/// Cells are stored row-major: cell (i, j) has beta index i and alpha index j.
struct HyperplaneMap {
    HyperplaneGrid grid;
    std::vector<HyperplaneCell> cells;
    std::array<Image, 3> anchor_noises;
    std::array<Image, 3> anchor_images;
    /// The plane evaluated exactly at (0,0), (1,0) and (0,1).
    std::array<HyperplaneCell, 3> corners;

    [[nodiscard]] const HyperplaneCell& cell(std::size_t beta_index, std::size_t alpha_index) const {
        return cells[beta_index * grid.resolution + alpha_index];
    }
    /// CSV with header "alpha,beta,class,similarity", one row per cell.
    [[nodiscard]] std::string cells_csv() const;
    [[nodiscard]] std::string corners_csv() const;
    /// 8-bit rendering: class k occupies the grey band [85 (k-1), 85 k), and
    /// brightness within the band encodes similarity in [0, 1].
    [[nodiscard]] std::vector<std::uint8_t> render() const;
};

/// Point on the noise plane, written as (1 - a - b) eps1 + a eps2 + b eps3 so
/// that the three corners reproduce their anchors exactly.
[[nodiscard]] Image hyperplane_noise(const Image& eps1, const Image& eps2, const Image& eps3, double alpha,
                                     double beta);

/// 1-based argmax of similarity to the anchors; ties go to the lowest index.
[[nodiscard]] HyperplaneCell classify_against_anchors(const std::array<std::vector<double>, 3>& anchor_desc,
                                                      const std::vector<double>& desc, double alpha, double beta);

[[nodiscard]] HyperplaneMap hyperplane_map(const DenoisingModel& model, const SamplerConfig& sampler,
                                           const Image& eps1, const Image& eps2, const Image& eps3,
                                           const HyperplaneGrid& grid, const SimilarityBackend& backend,
                                           std::size_t threads = 1);

/// Fraction of horizontally or vertically adjacent cell pairs that share a
/// class or whose anchor similarities differ by less than `tolerance`.
[[nodiscard]] double adjacent_coherence(const HyperplaneMap& map, double tolerance = 0.5);

/// Worst-case local Lipschitz ratio of the generation map around `center`:
/// max over pairs of n points drawn uniformly in the ball B(center, radius) of
/// |f(a) - f(b)| / |a - b|. The points are the first n draws of `rng`, so a
/// larger n evaluates a superset of pairs.
[[nodiscard]] double lipschitz_probe(const DenoisingModel& model, const SamplerConfig& sampler, const Image& center,
                                     double radius, std::size_t n, SeededRng rng, std::size_t threads = 1);

struct SweepRow {
    std::size_t dataset_size = 0;
    double rp_score = 0.0;          // minimum over sampler pairs
    double gl_score = 0.0;          // maximum over samplers
    double mae_mean = 0.0;          // nearest-train pixel MAE over all generated samples
    double mae_max = 0.0;
    double mae_below_one = 0.0;     // fraction of samples with nearest-train MAE < 1
};

struct SweepResult {
    std::vector<SweepRow> rows;
    /// Header "dataset_size,rp_score,gl_score,mae_mean,mae_max,mae_below_one".
    [[nodiscard]] std::string to_csv() const;
};

/// For each size: denoiser over base.subset(size, seed), n_samples noises drawn
/// from seed (shared across sizes and samplers), one sample set per sampler.
[[nodiscard]] SweepResult memorization_sweep(const Dataset& base, const Schedule& schedule,
                                             const std::vector<std::size_t>& sizes,
                                             const std::vector<SamplerConfig>& samplers, std::size_t n_samples,
                                             const SimilarityBackend& backend, std::uint64_t seed,
                                             std::size_t threads = 1);

/// Initial noises for noise ids [first, first + count): N(0, I) drawn from
/// SeededRng(seed, noise id), then scaled for the schedule.
[[nodiscard]] std::vector<Image> seeded_noises(const Schedule& schedule, Shape shape, std::uint64_t seed,
                                               std::int64_t first, std::size_t count);

}  // namespace reprodiff

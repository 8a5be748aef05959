// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "reprodiff/denoiser.hpp"
#include "reprodiff/image.hpp"
#include "reprodiff/rng.hpp"
#include "reprodiff/sampler.hpp"

namespace reprodiff {

/// Boolean (H, W) grid broadcast over channels; true marks an observed pixel.
class InpaintMask {
public:
    InpaintMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> observed);

    /// Centred side x side square. With `observed_inside` the square is the
    /// observed region; otherwise it is the hole and everything else is observed.
    static InpaintMask center_square(std::size_t height, std::size_t width, std::size_t side, bool observed_inside);
    /// "easy": 16x16 centred hole on 32x32 (25% of the area).
    /// "hard": 25x25 centred hole on 32x32 (about 61% of the area).
    /// Other image sizes scale the hole side proportionally.
    static InpaintMask preset(std::string_view name, std::size_t height, std::size_t width);
    /// PGM file where pixel values above 127 are observed.
    static InpaintMask load_pgm(const std::filesystem::path& path);
    void save_pgm(const std::filesystem::path& path) const;

    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] bool observed(std::size_t row, std::size_t col) const noexcept { return observed_[row * width_ + col] != 0; }
    [[nodiscard]] std::size_t observed_count() const noexcept;

    /// A(x): zeroes unobserved entries. Self-adjoint and idempotent.
    [[nodiscard]] Image apply(const Image& x) const;

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<std::uint8_t> observed_;
};

/// Measurement z = A(u) + eta * noise, with unobserved entries exactly zero.
struct Observation {
    Image z;
    InpaintMask mask;
    double noise_level = 0.0;
};

/// Masks u; with eta > 0, N(0, eta^2) noise from `rng` is added on observed entries.
[[nodiscard]] Observation apply_mask(const Image& u, const InpaintMask& mask, double noise_level = 0.0,
                                     std::optional<SeededRng> rng = std::nullopt);

/// |z - A(x0_prediction(x, t))|^2
[[nodiscard]] double data_consistency_loss(const OptimalDenoiser& den, const Image& x, double t,
                                           const Observation& obs);

/// Exact gradient of data_consistency_loss with respect to x:
///   -2 (d x0 / dx)^T A^T (z - A x0) = -2 posterior_cov_vjp(x, t, A(z - x0)).
[[nodiscard]] Image grad_data_consistency(const OptimalDenoiser& den, const Image& x, double t,
                                          const Observation& obs);

struct DpsConfig {
    std::size_t n_dps = 34;
    /// Per-interval step sizes; empty means 1.0 everywhere, a single value is broadcast.
    std::vector<double> xi;
    SolverMethod method = SolverMethod::ExpInt;
    int order = 3;
    /// Denoiser evaluations spent by the solver (Heun costs two per sub-step).
    std::size_t eval_budget = 100;
    TimeGrid grid = TimeGrid::Uniform;

    /// Sub-steps per interval: ceil(total / n_dps) each, the last intervals
    /// taking what remains (100 over 34 gives 33 x 3 + 1).
    [[nodiscard]] std::vector<std::size_t> substeps() const;
    [[nodiscard]] std::size_t total_substeps() const;
    [[nodiscard]] double step_size(std::size_t interval) const;
    /// Unconditional sampler on the same grid; dps_inpaint with xi = 0 reproduces it.
    [[nodiscard]] SamplerConfig sampler() const;
};

/// Deterministic diffusion posterior sampling. Each of n_dps intervals takes
/// the solver update from x_i and then subtracts xi_i times the data
/// consistency gradient evaluated at x_i. Returns the posterior-mean
/// prediction at the terminal state.
[[nodiscard]] Image dps_inpaint(const OptimalDenoiser& den, const Observation& obs, const Image& eps,
                                const DpsConfig& config);

[[nodiscard]] std::vector<Image> dps_inpaint_batch(const OptimalDenoiser& den, const std::vector<Observation>& obs,
                                                   const std::vector<Image>& eps, const DpsConfig& config,
                                                   std::size_t threads);

/// Pixel-space MAE restricted to observed entries.
[[nodiscard]] double observed_mae(const Image& a, const Image& b, const InpaintMask& mask);

}  // namespace reprodiff

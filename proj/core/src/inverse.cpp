// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/inverse.hpp"

#include <algorithm>
#include <cmath>

#include "reprodiff/error.hpp"
#include "reprodiff/image_io.hpp"
#include "reprodiff/parallel.hpp"

namespace reprodiff {

InpaintMask::InpaintMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> observed)
    : height_(height), width_(width), observed_(std::move(observed)) {
    if (height_ == 0 || width_ == 0) throw InvalidArgument("mask extents must be positive");
    if (observed_.size() != height_ * width_) throw InvalidArgument("mask size does not match its extents");
    for (auto& v : observed_) v = v ? 1 : 0;
    if (observed_count() == 0) throw InvalidArgument("mask must observe at least one pixel");
}

InpaintMask InpaintMask::center_square(std::size_t height, std::size_t width, std::size_t side, bool observed_inside) {
    if (side > height || side > width) throw InvalidArgument("mask square larger than the image");
    std::vector<std::uint8_t> obs(height * width, observed_inside ? 0 : 1);
    const std::size_t r0 = (height - side) / 2;
    const std::size_t c0 = (width - side) / 2;
    for (std::size_t r = r0; r < r0 + side; ++r)
        for (std::size_t c = c0; c < c0 + side; ++c) obs[r * width + c] = observed_inside ? 1 : 0;
    return InpaintMask(height, width, std::move(obs));
}

InpaintMask InpaintMask::preset(std::string_view name, std::size_t height, std::size_t width) {
    std::size_t side_at_32 = 0;
    if (name == "easy") {
        side_at_32 = 16;
    } else if (name == "hard") {
        side_at_32 = 25;
    } else {
        throw InvalidArgument("unknown mask preset '" + std::string(name) + "' (expected easy or hard)");
    }
    const std::size_t extent = std::min(height, width);
    const auto side = static_cast<std::size_t>(std::lround(static_cast<double>(side_at_32 * extent) / 32.0));
    return center_square(height, width, side, false);
}

InpaintMask InpaintMask::load_pgm(const std::filesystem::path& path) {
    const PixelRaster raster = read_raster(path);
    if (raster.shape.channels != 1) throw FormatError(path.string() + ": mask must be a single-channel image");
    std::vector<std::uint8_t> obs(raster.pixels.size());
    std::transform(raster.pixels.begin(), raster.pixels.end(), obs.begin(),
                   [](std::uint8_t p) { return static_cast<std::uint8_t>(p > 127 ? 1 : 0); });
    return InpaintMask(raster.shape.height, raster.shape.width, std::move(obs));
}

void InpaintMask::save_pgm(const std::filesystem::path& path) const {
    PixelRaster raster{Shape{height_, width_, 1}, std::vector<std::uint8_t>(observed_.size())};
    std::transform(observed_.begin(), observed_.end(), raster.pixels.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
    write_raster(path, raster);
}

std::size_t InpaintMask::observed_count() const noexcept {
    return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), 1));
}

Image InpaintMask::apply(const Image& x) const {
    const Shape& s = x.shape();
    if (s.height != height_ || s.width != width_) {
        throw InvalidArgument("mask " + std::to_string(height_) + "x" + std::to_string(width_) +
                              " does not match image shape " + s.to_string());
    }
    Image out(s, 0.0);
    for (std::size_t r = 0; r < height_; ++r)
        for (std::size_t c = 0; c < width_; ++c)
            if (observed(r, c))
                for (std::size_t ch = 0; ch < s.channels; ++ch) out.at(r, c, ch) = x.at(r, c, ch);
    return out;
}

Observation apply_mask(const Image& u, const InpaintMask& mask, double noise_level, std::optional<SeededRng> rng) {
    if (!(noise_level >= 0.0)) throw InvalidArgument("observation noise level must be nonnegative");
    Image z = u;
    if (noise_level > 0.0) {
        if (!rng) throw InvalidArgument("a noisy observation needs a seeded generator");
        for (double& v : z.values()) v += noise_level * rng->next_normal();
    }
    return Observation{mask.apply(z), mask, noise_level};
}

namespace {

Image masked_residual(const Observation& obs, const Image& x0) {
    Image r(x0.shape());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = obs.z[j] - x0[j];
    return obs.mask.apply(r);
}

}  // namespace

double data_consistency_loss(const OptimalDenoiser& den, const Image& x, double t, const Observation& obs) {
    const Image r = masked_residual(obs, den.x0_prediction(x, t));
    return dot(r.values(), r.values());
}

Image grad_data_consistency(const OptimalDenoiser& den, const Image& x, double t, const Observation& obs) {
    require_same_shape(den.dataset().shape(), obs.z.shape(), "observation");
    const ScheduleSample k = den.schedule().eval(t);
    const PosteriorStats stats = den.posterior_at(x, k.s, k.sigma);
    Image g = den.cov_vjp(stats, k.s, k.sigma, masked_residual(obs, stats.x0_mean));
    for (double& v : g.values()) v *= -2.0;
    return g;
}

std::size_t DpsConfig::total_substeps() const {
    const std::size_t per_step = method == SolverMethod::Heun2 ? 2 : 1;
    return eval_budget / per_step;
}

std::vector<std::size_t> DpsConfig::substeps() const {
    if (n_dps < 1) throw InvalidArgument("n_dps must be at least one");
    const std::size_t total = total_substeps();
    if (total < n_dps) {
        throw InvalidArgument("evaluation budget " + std::to_string(eval_budget) + " is too small for " +
                              std::to_string(n_dps) + " posterior steps");
    }
    const std::size_t chunk = (total + n_dps - 1) / n_dps;
    std::vector<std::size_t> out(n_dps);
    std::size_t remaining = total;
    for (std::size_t i = 0; i < n_dps; ++i) {
        const std::size_t after = n_dps - 1 - i;
        out[i] = std::min(chunk, remaining - after);
        remaining -= out[i];
    }
    return out;
}

double DpsConfig::step_size(std::size_t interval) const {
    if (xi.empty()) return 1.0;
    if (xi.size() == 1) return xi.front();
    return xi.at(interval);
}

SamplerConfig DpsConfig::sampler() const {
    SamplerConfig cfg;
    cfg.method = method;
    cfg.order = method == SolverMethod::ExpInt ? order : 1;
    cfg.steps = total_substeps();
    cfg.grid = grid;
    return cfg;
}

Image dps_inpaint(const OptimalDenoiser& den, const Observation& obs, const Image& eps, const DpsConfig& config) {
    require_same_shape(den.dataset().shape(), eps.shape(), "dps initial noise");
    require_same_shape(den.dataset().shape(), obs.z.shape(), "observation");
    if (!config.xi.empty() && config.xi.size() != 1 && config.xi.size() != config.n_dps) {
        throw InvalidArgument("xi must hold one value or one per posterior step");
    }
    for (double v : config.xi) {
        if (!(v >= 0.0)) throw InvalidArgument("xi values must be nonnegative");
    }
    const auto substeps = config.substeps();
    const SamplerConfig sampler = config.sampler();
    const auto [t_start, t_end] = time_span(den.schedule(), sampler, Direction::Generate);
    const auto times = time_grid(den.schedule(), t_start, t_end, sampler.steps, sampler.grid);

    OdeStepper stepper(den, sampler.method, sampler.order);
    Image x = eps;
    std::size_t k = 0;
    for (std::size_t i = 0; i < config.n_dps; ++i) {
        const double xi = config.step_size(i);
        const double t_i = times[k];
        Image grad;
        if (xi != 0.0) grad = grad_data_consistency(den, x, t_i, obs);

        Image next = x;
        for (std::size_t sub = 0; sub < substeps[i]; ++sub, ++k) {
            const Prediction pred = den.predict(next, times[k]);
            next = stepper.step(next, times[k], times[k + 1], pred);
        }
        if (xi != 0.0) {
            for (std::size_t j = 0; j < next.size(); ++j) next[j] -= xi * grad[j];
        }
        if (!next.all_finite()) {
            throw NumericalError("non-finite DPS state at posterior step " + std::to_string(i + 1) +
                                 " (t = " + std::to_string(times[k]) + ")");
        }
        x = std::move(next);
    }
    return den.predict(x, t_end).x0;
}

std::vector<Image> dps_inpaint_batch(const OptimalDenoiser& den, const std::vector<Observation>& obs,
                                     const std::vector<Image>& eps, const DpsConfig& config, std::size_t threads) {
    if (obs.size() != eps.size()) throw InvalidArgument("dps batch needs one observation per initial noise");
    std::vector<Image> out(eps.size());
    parallel_for(eps.size(), threads, [&](std::size_t i) { out[i] = dps_inpaint(den, obs[i], eps[i], config); });
    return out;
}

double observed_mae(const Image& a, const Image& b, const InpaintMask& mask) {
    require_same_shape(a.shape(), b.shape(), "observed_mae");
    const Shape& s = a.shape();
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < s.height; ++r)
        for (std::size_t c = 0; c < s.width; ++c)
            if (mask.observed(r, c))
                for (std::size_t ch = 0; ch < s.channels; ++ch) {
                    total += std::abs(static_cast<int>(to_pixel(a.at(r, c, ch))) - static_cast<int>(to_pixel(b.at(r, c, ch))));
                    ++count;
                }
    return total / static_cast<double>(count);
}

}  // namespace reprodiff

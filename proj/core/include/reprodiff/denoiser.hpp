// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "reprodiff/dataset.hpp"
#include "reprodiff/image.hpp"
#include "reprodiff/schedule.hpp"

namespace reprodiff {

/// Noise and clean-image predictions at one (x, t).
struct Prediction {
    Image eps;
    Image x0;
};

/// Anything that predicts the noise in x_t under a schedule. The sampler only
/// talks to this interface.
class DenoisingModel {
public:
    virtual ~DenoisingModel() = default;
    [[nodiscard]] virtual const Schedule& schedule() const noexcept = 0;
    [[nodiscard]] virtual Prediction predict(const Image& x, double t) const = 0;
};

/// Mixture responsibilities of the delta-mixture marginal at (x, t).
struct PosteriorStats {
    std::vector<double> weights;  // w_i, sums to one
    Image x0_mean;                // sum_i w_i y_i
    double log_norm = 0.0;        // log sum_i exp(a_i)
};

/// Exact minimiser of the noise-prediction loss for the uniform delta mixture
/// over a dataset:
///
///   eps*(x, t) = (x - s_t sum_i N(x; s_t y_i, s_t^2 sigma_t^2 I) y_i / sum_i N(...)) / (s_t sigma_t)
///
/// Responsibilities are evaluated in log space, w = softmax(a) with
/// a_i = -|x - s y_i|^2 / (2 s^2 sigma^2) and max-subtraction, so that tiny
/// sigma and large |x| neither overflow nor underflow. Cost is O(N d) per call.
///
/// There are no trainable parameters; (dataset, schedule) fully determine the
/// model. Instances are immutable and cheap to copy.
class OptimalDenoiser final : public DenoisingModel {
public:
    OptimalDenoiser(Dataset dataset, Schedule schedule);

    [[nodiscard]] const Dataset& dataset() const noexcept { return state_->dataset; }
    [[nodiscard]] const Schedule& schedule() const noexcept override { return state_->schedule; }

    [[nodiscard]] PosteriorStats posterior_weights(const Image& x, double t) const;
    [[nodiscard]] Image epsilon_star(const Image& x, double t) const;
    [[nodiscard]] Image x0_prediction(const Image& x, double t) const;

    /// (d x0_prediction / dx) v = Cov_w(y) v / (s sigma^2)
    ///   = sum_i w_i (y_i - x0) <y_i - x0, v> / (s sigma^2).
    /// The Jacobian is symmetric, so this is also the vector-Jacobian product.
    [[nodiscard]] Image posterior_cov_vjp(const Image& x, double t, const Image& v) const;

    [[nodiscard]] Prediction predict(const Image& x, double t) const override;

    /// Same quantities with the kernel given directly as (s, sigma); eval() is
    /// skipped, so any sigma > 0 is accepted.
    [[nodiscard]] PosteriorStats posterior_at(const Image& x, double s, double sigma) const;
    [[nodiscard]] Image epsilon_at(const Image& x, double s, double sigma) const;
    /// posterior_cov_vjp reusing responsibilities already computed at (x, s, sigma).
    [[nodiscard]] Image cov_vjp(const PosteriorStats& stats, double s, double sigma, const Image& v) const;

private:
    struct State {
        Dataset dataset;
        Schedule schedule;
        std::vector<double> packed;  // N x d
    };

    [[nodiscard]] ScheduleSample kernel(const Image& x, double t) const;

    std::shared_ptr<const State> state_;
};

/// Model whose noise prediction is an arbitrary field; x0 follows from the
/// Tweedie identity x0 = (x - s sigma eps) / s. Used to probe sampler structure.
class FieldModel final : public DenoisingModel {
public:
    using Field = std::function<Image(const Image& x, double t)>;

    FieldModel(Schedule schedule, Field field) : schedule_(std::move(schedule)), field_(std::move(field)) {}

    [[nodiscard]] const Schedule& schedule() const noexcept override { return schedule_; }
    [[nodiscard]] Prediction predict(const Image& x, double t) const override;

private:
    Schedule schedule_;
    Field field_;
};

}  // namespace reprodiff

// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "reprodiff/image.hpp"

namespace reprodiff {

enum class ScheduleKind { VP, VE, SubVP };

[[nodiscard]] std::string_view to_string(ScheduleKind kind) noexcept;
/// Parses "vp", "ve" or "subvp"/"sub-vp" (case-insensitive).
[[nodiscard]] ScheduleKind parse_schedule_kind(std::string_view text);

struct ScheduleParams {
    ScheduleKind kind = ScheduleKind::VP;
    double beta_min = 0.1;
    double beta_max = 20.0;
    double sigma_min = 0.01;
    double sigma_max = 50.0;
    double t_min = 1e-3;
    double t_max = 1.0;
};

/// Kernel values at one time: p_t(x_t | x_0) = N(s x_0, s^2 sigma^2 I), with
/// SDE drift f and diffusion g.
struct ScheduleSample {
    double t = 0.0;
    double s = 1.0;
    double sigma = 0.0;
    double f = 0.0;
    double g = 0.0;
};

/// Perturbation kernel for the VP, VE and sub-VP SDEs.
///
/// VP and sub-VP use a linear beta(t) = beta_min + t (beta_max - beta_min) with
/// B(t) = int_0^t beta. VE uses sigma_t = sigma_min (sigma_max / sigma_min)^t and s = 1.
class Schedule {
public:
    Schedule() : Schedule(ScheduleParams{}) {}
    explicit Schedule(const ScheduleParams& params);

    [[nodiscard]] const ScheduleParams& params() const noexcept { return params_; }
    [[nodiscard]] ScheduleKind kind() const noexcept { return params_.kind; }
    [[nodiscard]] double t_min() const noexcept { return params_.t_min; }
    [[nodiscard]] double t_max() const noexcept { return params_.t_max; }

    /// Closed-form kernel at t; throws InvalidArgument outside [t_min, t_max].
    [[nodiscard]] ScheduleSample eval(double t) const;

    // Unclipped closed forms, valid on [0, 1]. eval() is built from these.
    [[nodiscard]] double integrated_beta(double t) const noexcept;
    [[nodiscard]] double scale(double t) const noexcept;
    [[nodiscard]] double sigma(double t) const noexcept;
    [[nodiscard]] double drift(double t) const noexcept;
    [[nodiscard]] double diffusion_squared(double t) const noexcept;
    /// sigma at t = 0: zero for VP / sub-VP, sigma_min for VE.
    [[nodiscard]] double sigma_floor() const noexcept;

    /// Half log-SNR, lambda = -ln sigma_t.
    [[nodiscard]] double lambda(double t) const noexcept { return -std::log(sigma(t)); }
    /// Inverse of sigma(t) on the schedule's range.
    [[nodiscard]] double time_at_sigma(double sigma) const;
    [[nodiscard]] double time_at_lambda(double lambda) const { return time_at_sigma(std::exp(-lambda)); }

    friend bool operator==(const Schedule& a, const Schedule& b) noexcept;

private:
    ScheduleParams params_;
};

/// VP / sub-VP noise is used as drawn; VE noise is multiplied by sigma_max.
[[nodiscard]] Image scale_initial_noise(const Schedule& schedule, const Image& eps);

/// Max deviation of the closed-form s_t and sigma_t from adaptive quadrature of
///   s_t = exp(int_0^t f),  sigma_t^2 = sigma_floor^2 + int_0^t g^2 / s^2
/// over n_points uniformly spaced times in [t_min, t_max].
[[nodiscard]] double check_consistency(const Schedule& schedule, std::size_t n_points);

}  // namespace reprodiff

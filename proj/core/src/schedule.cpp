// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/schedule.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cctype>
#include <cmath>

#include "reprodiff/error.hpp"

namespace reprodiff {

std::string_view to_string(ScheduleKind kind) noexcept {
    switch (kind) {
        case ScheduleKind::VP: return "vp";
        case ScheduleKind::VE: return "ve";
        case ScheduleKind::SubVP: return "subvp";
    }
    return "?";
}

ScheduleKind parse_schedule_kind(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "vp") return ScheduleKind::VP;
    if (s == "ve") return ScheduleKind::VE;
    if (s == "subvp" || s == "sub-vp" || s == "sub_vp") return ScheduleKind::SubVP;
    throw InvalidArgument("unknown schedule kind '" + std::string(text) + "' (expected vp, ve or subvp)");
}

Schedule::Schedule(const ScheduleParams& params) : params_(params) {
    const auto& p = params_;
    if (!(p.t_min > 0.0 && p.t_min < p.t_max && p.t_max <= 1.0)) {
        throw InvalidArgument("schedule clip bounds must satisfy 0 < t_min < t_max <= 1");
    }
    if (p.kind == ScheduleKind::VE) {
        if (!(p.sigma_min > 0.0 && p.sigma_max > p.sigma_min && std::isfinite(p.sigma_max))) {
            throw InvalidArgument("VE schedule requires sigma_max > sigma_min > 0");
        }
    } else {
        if (!(p.beta_min >= 0.0 && p.beta_max >= p.beta_min && p.beta_max > 0.0 && std::isfinite(p.beta_max))) {
            throw InvalidArgument("VP/sub-VP schedule requires beta_max >= beta_min >= 0 and beta_max > 0");
        }
    }
}

bool operator==(const Schedule& a, const Schedule& b) noexcept {
    const auto& x = a.params_;
    const auto& y = b.params_;
    return x.kind == y.kind && x.beta_min == y.beta_min && x.beta_max == y.beta_max && x.sigma_min == y.sigma_min &&
           x.sigma_max == y.sigma_max && x.t_min == y.t_min && x.t_max == y.t_max;
}

double Schedule::integrated_beta(double t) const noexcept {
    return params_.beta_min * t + 0.5 * (params_.beta_max - params_.beta_min) * t * t;
}

double Schedule::scale(double t) const noexcept {
    if (params_.kind == ScheduleKind::VE) return 1.0;
    return std::exp(-0.5 * integrated_beta(t));
}

double Schedule::sigma(double t) const noexcept {
    switch (params_.kind) {
        case ScheduleKind::VP:
            // sigma^2 = 1/s^2 - 1 = e^B - 1
            return std::sqrt(std::expm1(integrated_beta(t)));
        case ScheduleKind::VE:
            return params_.sigma_min * std::pow(params_.sigma_max / params_.sigma_min, t);
        case ScheduleKind::SubVP: {
            // s sigma = 1 - e^{-B}, s = e^{-B/2}  =>  sigma = 2 sinh(B/2)
            return 2.0 * std::sinh(0.5 * integrated_beta(t));
        }
    }
    return 0.0;
}

double Schedule::drift(double t) const noexcept {
    if (params_.kind == ScheduleKind::VE) return 0.0;
    return -0.5 * (params_.beta_min + t * (params_.beta_max - params_.beta_min));
}

double Schedule::diffusion_squared(double t) const noexcept {
    const double beta = params_.beta_min + t * (params_.beta_max - params_.beta_min);
    switch (params_.kind) {
        case ScheduleKind::VP:
            return beta;
        case ScheduleKind::VE: {
            const double sig = sigma(t);
            return 2.0 * sig * sig * std::log(params_.sigma_max / params_.sigma_min);
        }
        case ScheduleKind::SubVP:
            return beta * -std::expm1(-2.0 * integrated_beta(t));
    }
    return 0.0;
}

double Schedule::sigma_floor() const noexcept {
    return params_.kind == ScheduleKind::VE ? params_.sigma_min : 0.0;
}

ScheduleSample Schedule::eval(double t) const {
    if (!(t >= params_.t_min && t <= params_.t_max)) {
        throw InvalidArgument("time " + std::to_string(t) + " outside schedule clip bounds [" +
                              std::to_string(params_.t_min) + ", " + std::to_string(params_.t_max) + "]");
    }
    return ScheduleSample{t, scale(t), sigma(t), drift(t), std::sqrt(diffusion_squared(t))};
}

double Schedule::time_at_sigma(double sig) const {
    if (!(sig > 0.0) || !std::isfinite(sig)) throw InvalidArgument("time_at_sigma: sigma must be positive and finite");
    const auto& p = params_;
    if (p.kind == ScheduleKind::VE) return std::log(sig / p.sigma_min) / std::log(p.sigma_max / p.sigma_min);
    const double b = p.kind == ScheduleKind::VP ? std::log1p(sig * sig) : 2.0 * std::asinh(0.5 * sig);
    // Positive root of 0.5 (beta_max - beta_min) t^2 + beta_min t - b = 0, written without cancellation.
    return 2.0 * b / (p.beta_min + std::sqrt(p.beta_min * p.beta_min + 2.0 * (p.beta_max - p.beta_min) * b));
}

Image scale_initial_noise(const Schedule& schedule, const Image& eps) {
    if (schedule.kind() != ScheduleKind::VE) return eps;
    Image out = eps;
    const double factor = schedule.params().sigma_max;
    for (double& v : out.values()) v *= factor;
    return out;
}

double check_consistency(const Schedule& schedule, std::size_t n_points) {
    if (n_points < 2) throw InvalidArgument("check_consistency needs at least two grid points");
    using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
    constexpr unsigned kMaxDepth = 20;
    constexpr double kTolerance = 1e-14;

    const auto f = [&](double xi) { return schedule.drift(xi); };
    const auto g2_over_s2 = [&](double xi) {
        const double s = schedule.scale(xi);
        return schedule.diffusion_squared(xi) / (s * s);
    };
    const double floor2 = schedule.sigma_floor() * schedule.sigma_floor();

    double worst = 0.0;
    const double t0 = schedule.t_min();
    const double span = schedule.t_max() - t0;
    for (std::size_t k = 0; k < n_points; ++k) {
        const double t = t0 + span * static_cast<double>(k) / static_cast<double>(n_points - 1);
        const double s_quad = std::exp(Quadrature::integrate(f, 0.0, t, kMaxDepth, kTolerance));
        const double sigma_quad = std::sqrt(floor2 + Quadrature::integrate(g2_over_s2, 0.0, t, kMaxDepth, kTolerance));
        worst = std::max({worst, std::abs(s_quad - schedule.scale(t)), std::abs(sigma_quad - schedule.sigma(t))});
    }
    return worst;
}

}  // namespace reprodiff

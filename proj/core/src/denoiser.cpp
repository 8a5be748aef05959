// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reprodiff/error.hpp"

namespace reprodiff {

OptimalDenoiser::OptimalDenoiser(Dataset dataset, Schedule schedule) {
    auto state = std::make_shared<State>(State{std::move(dataset), std::move(schedule), {}});
    state->packed = state->dataset.packed();
    state_ = std::move(state);
}

ScheduleSample OptimalDenoiser::kernel(const Image& x, double t) const {
    require_same_shape(dataset().shape(), x.shape(), "denoiser input");
    const ScheduleSample k = schedule().eval(t);
    if (!(k.sigma > 0.0)) throw InvalidArgument("denoiser evaluated at sigma_t = 0 (t below clip)");
    return k;
}

PosteriorStats OptimalDenoiser::posterior_at(const Image& x, double s, double sigma) const {
    require_same_shape(dataset().shape(), x.shape(), "denoiser input");
    if (!(sigma > 0.0) || !(s > 0.0)) throw InvalidArgument("posterior requires s > 0 and sigma > 0");
    if (!x.all_finite()) throw InvalidArgument("denoiser input contains non-finite values");

    const std::size_t n = dataset().size();
    const std::size_t d = x.size();
    const double* ys = state_->packed.data();
    const double* xs = x.data().data();
    const double inv_two_var = 1.0 / (2.0 * s * s * sigma * sigma);

    PosteriorStats stats;
    stats.weights.resize(n);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double* y = ys + i * d;
        double dist2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double r = xs[j] - s * y[j];
            dist2 += r * r;
        }
        const double a = -dist2 * inv_two_var;
        stats.weights[i] = a;
        max_logit = std::max(max_logit, a);
    }
    double total = 0.0;
    for (double& w : stats.weights) {
        w = std::exp(w - max_logit);
        total += w;
    }
    stats.log_norm = max_logit + std::log(total);
    const double inv_total = 1.0 / total;
    for (double& w : stats.weights) w *= inv_total;

    stats.x0_mean = Image(x.shape(), 0.0);
    double* out = stats.x0_mean.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = stats.weights[i];
        if (w == 0.0) continue;
        const double* y = ys + i * d;
        for (std::size_t j = 0; j < d; ++j) out[j] += w * y[j];
    }
    return stats;
}

Image OptimalDenoiser::epsilon_at(const Image& x, double s, double sigma) const {
    const PosteriorStats stats = posterior_at(x, s, sigma);
    Image eps(x.shape());
    const double inv = 1.0 / (s * sigma);
    for (std::size_t j = 0; j < x.size(); ++j) eps[j] = (x[j] - s * stats.x0_mean[j]) * inv;
    return eps;
}

PosteriorStats OptimalDenoiser::posterior_weights(const Image& x, double t) const {
    const ScheduleSample k = kernel(x, t);
    return posterior_at(x, k.s, k.sigma);
}

Image OptimalDenoiser::epsilon_star(const Image& x, double t) const {
    const ScheduleSample k = kernel(x, t);
    return epsilon_at(x, k.s, k.sigma);
}

Image OptimalDenoiser::x0_prediction(const Image& x, double t) const { return posterior_weights(x, t).x0_mean; }

Prediction OptimalDenoiser::predict(const Image& x, double t) const {
    const ScheduleSample k = kernel(x, t);
    PosteriorStats stats = posterior_at(x, k.s, k.sigma);
    Image eps(x.shape());
    const double inv = 1.0 / (k.s * k.sigma);
    for (std::size_t j = 0; j < x.size(); ++j) eps[j] = (x[j] - k.s * stats.x0_mean[j]) * inv;
    return Prediction{std::move(eps), std::move(stats.x0_mean)};
}

Image OptimalDenoiser::cov_vjp(const PosteriorStats& stats, double s, double sigma, const Image& v) const {
    const std::size_t n = dataset().size();
    const std::size_t d = v.size();
    const double* ys = state_->packed.data();
    const double* mean = stats.x0_mean.data().data();
    const double* vs = v.data().data();

    Image out(v.shape(), 0.0);
    double* o = out.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = stats.weights[i];
        if (w == 0.0) continue;
        const double* y = ys + i * d;
        double proj = 0.0;
        for (std::size_t j = 0; j < d; ++j) proj += (y[j] - mean[j]) * vs[j];
        const double c = w * proj;
        for (std::size_t j = 0; j < d; ++j) o[j] += c * (y[j] - mean[j]);
    }
    const double scale = 1.0 / (s * sigma * sigma);
    for (double& value : out.values()) value *= scale;
    return out;
}

Image OptimalDenoiser::posterior_cov_vjp(const Image& x, double t, const Image& v) const {
    const ScheduleSample k = kernel(x, t);
    require_same_shape(x.shape(), v.shape(), "posterior_cov_vjp direction");
    return cov_vjp(posterior_at(x, k.s, k.sigma), k.s, k.sigma, v);
}

Prediction FieldModel::predict(const Image& x, double t) const {
    const ScheduleSample k = schedule_.eval(t);
    Image eps = field_(x, t);
    require_same_shape(x.shape(), eps.shape(), "field model output");
    Image x0(x.shape());
    for (std::size_t j = 0; j < x.size(); ++j) x0[j] = (x[j] - k.s * k.sigma * eps[j]) / k.s;
    return Prediction{std::move(eps), std::move(x0)};
}

}  // namespace reprodiff

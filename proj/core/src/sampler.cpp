// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "reprodiff/error.hpp"
#include "reprodiff/parallel.hpp"

namespace reprodiff {

namespace {

std::string lowercase(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// Weights of the exponential integrator over one step of length h in lambda:
//   i0 = int_0^h e^{-(h-u)} du, i1 = int_0^h e^{-(h-u)} u du, i2 = int_0^h e^{-(h-u)} u^2/2 du.
struct PhiWeights {
    double decay, i0, i1, i2;
};

PhiWeights phi_weights(double h) {
    PhiWeights w{};
    w.decay = std::exp(-h);
    const double em1 = std::expm1(-h);
    w.i0 = -em1;
    if (std::abs(h) < 1e-2) {
        const double h2 = h * h, h3 = h2 * h, h4 = h3 * h, h5 = h4 * h, h6 = h5 * h;
        w.i1 = h2 / 2 - h3 / 6 + h4 / 24 - h5 / 120 + h6 / 720;
        w.i2 = h3 / 6 - h4 / 24 + h5 / 120 - h6 / 720;
    } else {
        w.i1 = h + em1;
        w.i2 = 0.5 * h * h - h - em1;
    }
    return w;
}

void require_finite(const Image& x, std::size_t step, double t) {
    if (!x.all_finite()) {
        throw NumericalError("non-finite state at step " + std::to_string(step) + " (t = " + std::to_string(t) + ")");
    }
}

}  // namespace

std::string SamplerConfig::label() const {
    std::ostringstream os;
    switch (method) {
        case SolverMethod::Euler: os << "euler"; break;
        case SolverMethod::Heun2: os << "heun2"; break;
        case SolverMethod::ExpInt: os << "expint" << order; break;
    }
    os << '-' << steps;
    return os.str();
}

void parse_method(std::string_view text, SamplerConfig& config) {
    const std::string s = lowercase(text);
    if (s == "euler") {
        config.method = SolverMethod::Euler;
        config.order = 1;
    } else if (s == "heun2" || s == "heun") {
        config.method = SolverMethod::Heun2;
        config.order = 1;
    } else if (s == "expint1" || s == "expint2" || s == "expint3") {
        config.method = SolverMethod::ExpInt;
        config.order = s.back() - '0';
    } else {
        throw InvalidArgument("unknown sampler method '" + std::string(text) +
                              "' (expected euler, heun2, expint1, expint2 or expint3)");
    }
}

SamplerConfig parse_sampler_spec(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw InvalidArgument("sampler spec '" + std::string(text) + "' must look like <method>:<steps>");
    }
    SamplerConfig config;
    parse_method(text.substr(0, colon), config);
    const std::string steps(text.substr(colon + 1));
    try {
        std::size_t used = 0;
        const long long n = std::stoll(steps, &used);
        if (used != steps.size() || n < 1) throw std::invalid_argument("steps");
        config.steps = static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw InvalidArgument("sampler spec '" + std::string(text) + "' has an invalid step count");
    }
    return config;
}

std::string_view to_string(TimeGrid grid) noexcept { return grid == TimeGrid::Uniform ? "uniform" : "logsnr"; }

TimeGrid parse_time_grid(std::string_view text) {
    const std::string s = lowercase(text);
    if (s == "uniform") return TimeGrid::Uniform;
    if (s == "logsnr") return TimeGrid::LogSnr;
    throw InvalidArgument("unknown time grid '" + std::string(text) + "' (expected uniform or logsnr)");
}

std::string_view to_string(Direction direction) noexcept {
    return direction == Direction::Generate ? "generate" : "encode";
}

Direction parse_direction(std::string_view text) {
    const std::string s = lowercase(text);
    if (s == "generate") return Direction::Generate;
    if (s == "encode") return Direction::Encode;
    throw InvalidArgument("unknown sampler direction '" + std::string(text) + "' (expected generate or encode)");
}

std::pair<double, double> time_span(const Schedule& schedule, const SamplerConfig& config, Direction direction) {
    const bool gen = direction == Direction::Generate;
    const double t_start = config.t_start.value_or(gen ? schedule.t_max() : schedule.t_min());
    const double t_end = config.t_end.value_or(gen ? schedule.t_min() : schedule.t_max());
    const auto inside = [&](double t) { return t >= schedule.t_min() && t <= schedule.t_max(); };
    if (!inside(t_start) || !inside(t_end)) {
        throw InvalidArgument("sampler times must lie within the schedule clip bounds");
    }
    if (gen ? !(t_start > t_end) : !(t_start < t_end)) {
        throw InvalidArgument(gen ? "generation requires t_start > t_end" : "encoding requires t_start < t_end");
    }
    if (config.steps < 1) throw InvalidArgument("sampler needs at least one step");
    if (config.method == SolverMethod::ExpInt) {
        if (config.order < 1 || config.order > 3) throw InvalidArgument("ExpInt order must be 1, 2 or 3");
        if (static_cast<std::size_t>(config.order) > config.steps) {
            throw InvalidArgument("ExpInt order must not exceed the step count");
        }
    }
    return {t_start, t_end};
}

std::vector<double> time_grid(const Schedule& schedule, double t_start, double t_end, std::size_t steps,
                              TimeGrid grid) {
    if (steps < 1) throw InvalidArgument("time grid needs at least one step");
    std::vector<double> times(steps + 1);
    const double lo = std::min(t_start, t_end);
    const double hi = std::max(t_start, t_end);
    if (grid == TimeGrid::Uniform) {
        for (std::size_t k = 0; k <= steps; ++k) {
            times[k] = t_start + (t_end - t_start) * (static_cast<double>(k) / static_cast<double>(steps));
        }
    } else {
        const double l0 = schedule.lambda(t_start);
        const double l1 = schedule.lambda(t_end);
        for (std::size_t k = 0; k <= steps; ++k) {
            const double lambda = l0 + (l1 - l0) * (static_cast<double>(k) / static_cast<double>(steps));
            times[k] = std::clamp(schedule.time_at_lambda(lambda), lo, hi);
        }
    }
    times.front() = t_start;
    times.back() = t_end;
    return times;
}

Image pf_ode_rhs(const Schedule& schedule, const Image& x, double t, const Image& eps) {
    require_same_shape(x.shape(), eps.shape(), "pf_ode_rhs");
    const ScheduleSample k = schedule.eval(t);
    const double coeff = k.g * k.g / (2.0 * k.s * k.sigma);
    Image out(x.shape());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = k.f * x[j] + coeff * eps[j];
    return out;
}

Image pf_ode_rhs(const DenoisingModel& model, const Image& x, double t) {
    return pf_ode_rhs(model.schedule(), x, t, model.predict(x, t).eps);
}

OdeStepper::OdeStepper(const DenoisingModel& model, SolverMethod method, int order)
    : model_(&model), method_(method), order_(order) {
    if (method_ == SolverMethod::ExpInt && (order_ < 1 || order_ > 3)) {
        throw InvalidArgument("ExpInt order must be 1, 2 or 3");
    }
}

Image OdeStepper::step(const Image& x, double t, double t_next, const Prediction& at_start) {
    const Schedule& schedule = model_->schedule();
    const double h = t_next - t;
    switch (method_) {
        case SolverMethod::Euler: {
            Image k1 = pf_ode_rhs(schedule, x, t, at_start.eps);
            for (std::size_t j = 0; j < x.size(); ++j) k1[j] = x[j] + h * k1[j];
            return k1;
        }
        case SolverMethod::Heun2: {
            const Image k1 = pf_ode_rhs(schedule, x, t, at_start.eps);
            Image trial(x.shape());
            for (std::size_t j = 0; j < x.size(); ++j) trial[j] = x[j] + h * k1[j];
            const Image k2 = pf_ode_rhs(schedule, trial, t_next, model_->predict(trial, t_next).eps);
            Image out(x.shape());
            for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + 0.5 * h * (k1[j] + k2[j]);
            return out;
        }
        case SolverMethod::ExpInt:
            break;
    }

    const ScheduleSample now = schedule.eval(t);
    const ScheduleSample next = schedule.eval(t_next);
    const double lambda = -std::log(now.sigma);
    const double lambda_next = -std::log(next.sigma);
    const PhiWeights w = phi_weights(lambda_next - lambda);
    const int order = std::min<int>(order_, static_cast<int>(history_.size()) + 1);

    const Image& d0 = at_start.x0;
    Image out(x.shape());
    if (order == 1) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            out[j] = next.s * (w.decay * (x[j] / now.s) + w.i0 * d0[j]);
        }
    } else if (order == 2) {
        const HistoryEntry& p1 = history_[0];
        const double r1 = lambda - p1.lambda;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double slope = (d0[j] - p1.x0[j]) / r1;
            out[j] = next.s * (w.decay * (x[j] / now.s) + w.i0 * d0[j] + w.i1 * slope);
        }
    } else {
        const HistoryEntry& p1 = history_[0];
        const HistoryEntry& p2 = history_[1];
        const double r1 = lambda - p1.lambda;
        const double r12 = p1.lambda - p2.lambda;
        const double r2 = lambda - p2.lambda;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d1 = (d0[j] - p1.x0[j]) / r1;
            const double d12 = (p1.x0[j] - p2.x0[j]) / r12;
            const double curvature = (d1 - d12) / r2;
            const double slope = d1 + curvature * r1;
            out[j] = next.s * (w.decay * (x[j] / now.s) + w.i0 * d0[j] + w.i1 * slope + 2.0 * w.i2 * curvature);
        }
    }
    history_.push_front(HistoryEntry{lambda, d0});
    if (history_.size() > 2) history_.pop_back();
    return out;
}

Image integrate(const DenoisingModel& model, const Image& x_start, const std::vector<double>& times,
                const SamplerConfig& config, Trajectory* trajectory) {
    if (times.size() < 2) throw InvalidArgument("integrate needs at least two time points");
    if (!x_start.all_finite()) throw InvalidArgument("initial state contains non-finite values");
    OdeStepper stepper(model, config.method, config.order);
    Image x = x_start;
    if (trajectory) {
        trajectory->times.assign(1, times.front());
        trajectory->states.assign(1, x);
    }
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const Prediction pred = model.predict(x, times[k]);
        x = stepper.step(x, times[k], times[k + 1], pred);
        require_finite(x, k + 1, times[k + 1]);
        if (trajectory) {
            trajectory->times.push_back(times[k + 1]);
            trajectory->states.push_back(x);
        }
    }
    return x;
}

Image generate(const DenoisingModel& model, const Image& x_T, const SamplerConfig& config, Trajectory* trajectory) {
    const auto [t_start, t_end] = time_span(model.schedule(), config, Direction::Generate);
    const auto times = time_grid(model.schedule(), t_start, t_end, config.steps, config.grid);
    const Image terminal = integrate(model, x_T, times, config, config.record_trajectory ? trajectory : nullptr);
    Image out;
    if (config.denoise_final) {
        out = model.predict(terminal, t_end).x0;
    } else {
        out = terminal;
        const double s = model.schedule().scale(t_end);
        for (double& v : out.values()) v /= s;
    }
    require_finite(out, config.steps, t_end);
    return out;
}

Image encode(const DenoisingModel& model, const Image& x_0, const SamplerConfig& config, Trajectory* trajectory) {
    const auto [t_start, t_end] = time_span(model.schedule(), config, Direction::Encode);
    const auto times = time_grid(model.schedule(), t_start, t_end, config.steps, config.grid);
    Image start = x_0;
    const double s = model.schedule().scale(t_start);
    for (double& v : start.values()) v *= s;
    return integrate(model, start, times, config, config.record_trajectory ? trajectory : nullptr);
}

std::vector<Image> generate_batch(const DenoisingModel& model, const std::vector<Image>& noises,
                                  const SamplerConfig& config, std::size_t threads) {
    std::vector<Image> out(noises.size());
    parallel_for(noises.size(), threads, [&](std::size_t i) { out[i] = generate(model, noises[i], config); });
    return out;
}

std::vector<Image> encode_batch(const DenoisingModel& model, const std::vector<Image>& images,
                                const SamplerConfig& config, std::size_t threads) {
    std::vector<Image> out(images.size());
    parallel_for(images.size(), threads, [&](std::size_t i) { out[i] = encode(model, images[i], config); });
    return out;
}

std::vector<ConvergencePoint> convergence_probe(const DenoisingModel& model, const Image& x_T,
                                                const SamplerConfig& method,
                                                const std::vector<std::size_t>& steps_list) {
    if (steps_list.empty()) throw InvalidArgument("convergence_probe needs at least one step count");
    if (!std::is_sorted(steps_list.begin(), steps_list.end())) {
        throw InvalidArgument("convergence_probe step counts must be ascending");
    }
    std::vector<Image> terminals;
    for (std::size_t steps : steps_list) {
        SamplerConfig cfg = method;
        cfg.steps = steps;
        const auto [t_start, t_end] = time_span(model.schedule(), cfg, Direction::Generate);
        terminals.push_back(integrate(model, x_T, time_grid(model.schedule(), t_start, t_end, steps, cfg.grid), cfg));
    }
    std::vector<ConvergencePoint> points;
    for (std::size_t i = 0; i < steps_list.size(); ++i) {
        points.push_back({steps_list[i], max_abs_diff(terminals[i], terminals.back())});
    }
    return points;
}

double fitted_order(const std::vector<ConvergencePoint>& points) {
    if (points.size() < 3) throw InvalidArgument("fitted_order needs at least two points besides the reference");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(points.size() - 1);
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i].error > 0.0)) throw NumericalError("fitted_order: zero error below the reference run");
        const double lx = std::log(static_cast<double>(points[i].steps));
        const double ly = -std::log(points[i].error);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace reprodiff

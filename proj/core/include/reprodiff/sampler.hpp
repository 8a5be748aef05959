// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reprodiff/denoiser.hpp"
#include "reprodiff/image.hpp"
#include "reprodiff/schedule.hpp"

namespace reprodiff {

enum class SolverMethod { Euler, Heun2, ExpInt };
enum class TimeGrid { Uniform, LogSnr };
enum class Direction { Generate, Encode };

struct SamplerConfig {
    SolverMethod method = SolverMethod::Heun2;
    int order = 1;  // ExpInt only: 1, 2 or 3
    std::size_t steps = 64;
    /// Defaults: generation runs t_max -> t_min, encoding t_min -> t_max.
    std::optional<double> t_start;
    std::optional<double> t_end;
    TimeGrid grid = TimeGrid::Uniform;
    bool record_trajectory = false;
    /// Generation returns the posterior-mean prediction at t_end when set,
    /// otherwise the raw terminal state divided by s_{t_end}.
    bool denoise_final = true;

    static SamplerConfig euler(std::size_t steps) { return make(SolverMethod::Euler, 1, steps); }
    static SamplerConfig heun2(std::size_t steps) { return make(SolverMethod::Heun2, 1, steps); }
    static SamplerConfig exp_int(int order, std::size_t steps) { return make(SolverMethod::ExpInt, order, steps); }
    static SamplerConfig make(SolverMethod method, int order, std::size_t steps) {
        SamplerConfig c;
        c.method = method;
        c.order = order;
        c.steps = steps;
        return c;
    }

    /// Short identifier such as "heun2-64" or "expint3-32".
    [[nodiscard]] std::string label() const;
};

/// Parses "euler", "heun2", "expint1".."expint3" (method only).
void parse_method(std::string_view text, SamplerConfig& config);
/// Parses "<method>:<steps>", e.g. "heun2:64".
[[nodiscard]] SamplerConfig parse_sampler_spec(std::string_view text);
[[nodiscard]] std::string_view to_string(TimeGrid grid) noexcept;
[[nodiscard]] TimeGrid parse_time_grid(std::string_view text);
[[nodiscard]] std::string_view to_string(Direction direction) noexcept;
[[nodiscard]] Direction parse_direction(std::string_view text);

struct Trajectory {
    std::vector<double> times;
    std::vector<Image> states;
};

/// Resolved start/end times for `direction`, validated against the schedule.
[[nodiscard]] std::pair<double, double> time_span(const Schedule& schedule, const SamplerConfig& config,
                                                  Direction direction);

/// steps + 1 monotone times from t_start to t_end (endpoints exact), uniform in
/// t or in lambda = -ln sigma_t.
[[nodiscard]] std::vector<double> time_grid(const Schedule& schedule, double t_start, double t_end, std::size_t steps,
                                            TimeGrid grid);

/// Probability-flow ODE right-hand side f(t) x + g^2(t) / (2 s_t sigma_t) eps.
[[nodiscard]] Image pf_ode_rhs(const Schedule& schedule, const Image& x, double t, const Image& eps);
[[nodiscard]] Image pf_ode_rhs(const DenoisingModel& model, const Image& x, double t);

/// One-step-at-a-time PF-ODE integrator.
///
/// Euler and Heun2 step the ODE in t. ExpInt treats the drift exactly: with
/// y = x / s and lambda = -ln sigma the ODE is dy/dlambda = x0(y) - y, and the
/// step integrates e^{-(lambda' - lambda)} against a polynomial extrapolation
/// of the last `order` x0 predictions (exponential Adams-Bashforth). The first
/// steps of a trajectory run at reduced order until enough history exists.
/// Order 1 is the DDIM update.
class OdeStepper {
public:
    OdeStepper(const DenoisingModel& model, SolverMethod method, int order = 1);

    /// Advances x from t to t_next. `at_start` must be model.predict(x, t).
    [[nodiscard]] Image step(const Image& x, double t, double t_next, const Prediction& at_start);
    /// Clears multistep history; call before integrating a new trajectory.
    void reset() noexcept { history_.clear(); }

private:
    struct HistoryEntry {
        double lambda;
        Image x0;
    };

    const DenoisingModel* model_;
    SolverMethod method_;
    int order_;
    std::deque<HistoryEntry> history_;
};

/// Integrates the PF-ODE across `times` and returns the raw terminal state.
/// Throws NumericalError naming the step and time if a state turns non-finite.
[[nodiscard]] Image integrate(const DenoisingModel& model, const Image& x_start, const std::vector<double>& times,
                              const SamplerConfig& config, Trajectory* trajectory = nullptr);

/// Generation f: noise -> image. Integrates from t_start down to t_end and
/// returns the posterior-mean (Tweedie) prediction at the terminal state, or
/// the unscaled terminal state when denoise_final is off (the exact inverse
/// of encode up to discretization).
[[nodiscard]] Image generate(const DenoisingModel& model, const Image& x_T, const SamplerConfig& config,
                             Trajectory* trajectory = nullptr);

/// Encoding f^-1: image -> noise. Starts from x = s_{t_start} x_0 and
/// integrates up to t_end; returns the terminal state (the noise code).
[[nodiscard]] Image encode(const DenoisingModel& model, const Image& x_0, const SamplerConfig& config,
                           Trajectory* trajectory = nullptr);

/// generate() over a batch on `threads` workers; output order follows input order.
[[nodiscard]] std::vector<Image> generate_batch(const DenoisingModel& model, const std::vector<Image>& noises,
                                                const SamplerConfig& config, std::size_t threads);
[[nodiscard]] std::vector<Image> encode_batch(const DenoisingModel& model, const std::vector<Image>& images,
                                              const SamplerConfig& config, std::size_t threads);

struct ConvergencePoint {
    std::size_t steps = 0;
    double error = 0.0;  // max-abs deviation of the terminal state from the finest run
};

/// Runs generation integrals at each step count (ascending) and measures the
/// raw terminal state against the finest run.
[[nodiscard]] std::vector<ConvergencePoint> convergence_probe(const DenoisingModel& model, const Image& x_T,
                                                              const SamplerConfig& method,
                                                              const std::vector<std::size_t>& steps_list);

/// Least-squares slope of -log(error) against log(steps), excluding the
/// reference (finest) point; approximates the method's order.
[[nodiscard]] double fitted_order(const std::vector<ConvergencePoint>& points);

}  // namespace reprodiff

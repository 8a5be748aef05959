// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "reprodiff/error.hpp"
#include "reprodiff/schedule.hpp"

using namespace reprodiff;

namespace {

Schedule make(ScheduleKind kind) {
    ScheduleParams p;
    p.kind = kind;
    return Schedule(p);
}

const ScheduleKind kAllKinds[] = {ScheduleKind::VP, ScheduleKind::VE, ScheduleKind::SubVP};

}  // namespace

TEST_CASE("VP kernel at the defaults") {
    const Schedule vp = make(ScheduleKind::VP);
    // B(1) = 0.1 + (20 - 0.1) / 2 = 10.05
    CHECK(vp.integrated_beta(1.0) == doctest::Approx(10.05).epsilon(1e-15));
    CHECK(vp.scale(1.0) == doctest::Approx(std::exp(-5.025)).epsilon(1e-14));
    CHECK(vp.sigma(1.0) == doctest::Approx(std::sqrt(std::exp(10.05) - 1.0)).epsilon(1e-14));
    // Variance preserving: s^2 (1 + sigma^2) = 1.
    for (double t : {1e-3, 0.1, 0.5, 1.0}) {
        const double s = vp.scale(t);
        const double sig = vp.sigma(t);
        CHECK(s * s * (1.0 + sig * sig) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("VE kernel has unit scale and geometric sigma") {
    const Schedule ve = make(ScheduleKind::VE);
    for (double t : {1e-3, 0.3, 1.0}) CHECK(ve.scale(t) == 1.0);
    CHECK(ve.sigma(1.0) == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(ve.sigma(0.5) == doctest::Approx(std::sqrt(0.01 * 50.0)).epsilon(1e-14));
    CHECK(ve.drift(0.4) == 0.0);
}

TEST_CASE("sub-VP kernel") {
    const Schedule sub = make(ScheduleKind::SubVP);
    for (double t : {1e-3, 0.2, 0.7, 1.0}) {
        const double b = sub.integrated_beta(t);
        // Marginal standard deviation s sigma = 1 - e^{-B}.
        CHECK(sub.scale(t) * sub.sigma(t) == doctest::Approx(1.0 - std::exp(-b)).epsilon(1e-13));
    }
}

TEST_CASE("initial noise scaling") {
    const Image eps(Shape{1, 2, 1}, {0.5, -1.0});
    const Image ve = scale_initial_noise(make(ScheduleKind::VE), eps);
    CHECK(ve[0] == 25.0);
    CHECK(ve[1] == -50.0);
    CHECK(scale_initial_noise(make(ScheduleKind::VP), eps) == eps);
    CHECK(scale_initial_noise(make(ScheduleKind::SubVP), eps) == eps);
}

TEST_CASE("sigma increases and lambda decreases on the clip range") {
    for (ScheduleKind kind : kAllKinds) {
        const Schedule s = make(kind);
        double prev_sigma = 0.0;
        double prev_lambda = INFINITY;
        for (int k = 0; k <= 200; ++k) {
            const double t = 1e-3 + (1.0 - 1e-3) * k / 200.0;
            CHECK(s.sigma(t) > prev_sigma);
            CHECK(s.lambda(t) < prev_lambda);
            prev_sigma = s.sigma(t);
            prev_lambda = s.lambda(t);
        }
    }
}

TEST_CASE("g^2 equals s^2 d(sigma^2)/dt") {
    for (ScheduleKind kind : kAllKinds) {
        const Schedule s = make(kind);
        for (double t : {0.01, 0.1, 0.3, 0.6, 0.9}) {
            const double h = 1e-6;
            const double ds2 = (std::pow(s.sigma(t + h), 2) - std::pow(s.sigma(t - h), 2)) / (2 * h);
            const double expected = s.scale(t) * s.scale(t) * ds2;
            CHECK(std::abs(s.diffusion_squared(t) - expected) <= 1e-6 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("drift equals d(ln s)/dt") {
    for (ScheduleKind kind : kAllKinds) {
        const Schedule s = make(kind);
        for (double t : {0.05, 0.5, 0.95}) {
            const double h = 1e-6;
            const double dlog = (std::log(s.scale(t + h)) - std::log(s.scale(t - h))) / (2 * h);
            CHECK(s.drift(t) == doctest::Approx(dlog).epsilon(1e-7));
        }
    }
}

TEST_CASE("closed forms agree with quadrature") {
    for (ScheduleKind kind : kAllKinds) {
        const Schedule s = make(kind);
        CHECK(check_consistency(s, 64) < 1e-8);
        CHECK(check_consistency(s, 2) < 1e-8);
    }
    CHECK_THROWS_AS((void)check_consistency(make(ScheduleKind::VP), 1), InvalidArgument);
}

TEST_CASE("time_at_sigma inverts sigma") {
    for (ScheduleKind kind : kAllKinds) {
        const Schedule s = make(kind);
        for (double t : {1e-3, 0.25, 0.75, 1.0}) {
            CHECK(s.time_at_sigma(s.sigma(t)) == doctest::Approx(t).epsilon(1e-12));
            CHECK(s.time_at_lambda(s.lambda(t)) == doctest::Approx(t).epsilon(1e-12));
        }
    }
}

TEST_CASE("eval enforces clip bounds and reports the kernel") {
    const Schedule vp = make(ScheduleKind::VP);
    CHECK_THROWS_AS((void)vp.eval(0.0), InvalidArgument);
    CHECK_THROWS_AS((void)vp.eval(1.0 + 1e-12), InvalidArgument);
    const ScheduleSample k = vp.eval(0.5);
    CHECK(k.s == vp.scale(0.5));
    CHECK(k.sigma == vp.sigma(0.5));
    CHECK(k.g * k.g == doctest::Approx(vp.diffusion_squared(0.5)));
}

TEST_CASE("parameter validation and parsing") {
    ScheduleParams p;
    p.t_min = 0.0;
    CHECK_THROWS_AS(Schedule{p}, InvalidArgument);
    p = ScheduleParams{};
    p.kind = ScheduleKind::VE;
    p.sigma_max = p.sigma_min;
    CHECK_THROWS_AS(Schedule{p}, InvalidArgument);
    CHECK(parse_schedule_kind("VP") == ScheduleKind::VP);
    CHECK(parse_schedule_kind("sub-vp") == ScheduleKind::SubVP);
    CHECK_THROWS_AS((void)parse_schedule_kind("cosine"), InvalidArgument);
}

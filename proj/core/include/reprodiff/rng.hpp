// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "reprodiff/image.hpp"

namespace reprodiff {

/// Counter-based 64-bit generator keyed by (seed, stream).
///
/// Word k of a stream is mix(seed_key + mix(stream_key + k * golden)), where
/// mix is the splitmix64 finalizer. The stream is a pure function of
/// (seed, stream, k) and uses only integer arithmetic, so it is identical on
/// every platform. Normal variates use Box-Muller on 53-bit uniforms in (0, 1).
///
/// Single owner: parallel work must use distinct stream ids, never share one
/// instance.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform in the open interval (0, 1) with 53 bits of resolution.
    double next_uniform() noexcept;
    /// Uniform integer in [0, bound) without modulo bias. bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) noexcept;
    double next_normal() noexcept;

    /// Derives an independent generator for a sub-task; does not advance this one.
    [[nodiscard]] SeededRng fork(std::uint64_t stream) const noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t seed_key_;
    std::uint64_t stream_key_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

[[nodiscard]] std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// I.i.d. standard normal image drawn from `rng`.
[[nodiscard]] Image sample_standard_normal(SeededRng& rng, Shape shape);

/// Random permutation of 0..n-1 (Fisher-Yates driven by `rng`).
[[nodiscard]] std::vector<std::size_t> permutation(SeededRng& rng, std::size_t n);

}  // namespace reprodiff

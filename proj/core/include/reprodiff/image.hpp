// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace reprodiff {

/// Height x width x channels. Data is laid out row-major with channels innermost.
struct Shape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;

    [[nodiscard]] std::size_t size() const noexcept { return height * width * channels; }
    [[nodiscard]] bool valid() const noexcept { return height >= 1 && width >= 1 && channels >= 1; }
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Throws InvalidArgument unless every extent is at least one.
void require_valid(const Shape& shape);

/// A flat real-valued image in the canonical [-1, 1] domain.
///
/// Values are stored as double; the canonical domain is a convention, not
/// enforced, since intermediate ODE states leave it freely.
class Image {
public:
    Image() = default;
    explicit Image(Shape shape, double fill = 0.0);
    Image(Shape shape, std::vector<double> data);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<double> values() noexcept { return data_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    double& at(std::size_t row, std::size_t col, std::size_t channel) noexcept {
        return data_[(row * shape_.width + col) * shape_.channels + channel];
    }
    [[nodiscard]] double at(std::size_t row, std::size_t col, std::size_t channel) const noexcept {
        return data_[(row * shape_.width + col) * shape_.channels + channel];
    }

    [[nodiscard]] bool all_finite() const noexcept;

    friend bool operator==(const Image&, const Image&) = default;

private:
    Shape shape_{};
    std::vector<double> data_;
};

/// Canonical 8-bit mapping: p = clamp(round((x + 1) * 127.5), 0, 255).
[[nodiscard]] std::uint8_t to_pixel(double value) noexcept;

/// Inverse of to_pixel on the 256 grid points: x = p / 127.5 - 1.
[[nodiscard]] double from_pixel(std::uint8_t pixel) noexcept;

[[nodiscard]] std::vector<std::uint8_t> to_pixels(const Image& image);
[[nodiscard]] Image from_pixels(Shape shape, std::span<const std::uint8_t> pixels);

// Small dense helpers shared by the numerical modules.
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b) noexcept;
[[nodiscard]] double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
[[nodiscard]] double norm2(std::span<const double> a) noexcept;
[[nodiscard]] double max_abs_diff(const Image& a, const Image& b);

/// Throws InvalidArgument naming `what` when the shapes differ.
void require_same_shape(const Shape& expected, const Shape& actual, const char* what);

}  // namespace reprodiff

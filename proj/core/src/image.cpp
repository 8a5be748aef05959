// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/image.hpp"

#include <algorithm>
#include <cmath>

#include "reprodiff/error.hpp"

namespace reprodiff {

std::string Shape::to_string() const {
    return "(" + std::to_string(height) + "," + std::to_string(width) + "," + std::to_string(channels) + ")";
}

void require_valid(const Shape& shape) {
    if (!shape.valid()) {
        throw InvalidArgument("invalid image shape " + shape.to_string() + ": every extent must be >= 1");
    }
}

Image::Image(Shape shape, double fill) : shape_(shape) {
    require_valid(shape_);
    data_.assign(shape_.size(), fill);
}

Image::Image(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    require_valid(shape_);
    if (data_.size() != shape_.size()) {
        throw InvalidArgument("image data length " + std::to_string(data_.size()) + " does not match shape " +
                              shape_.to_string());
    }
}

bool Image::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::uint8_t to_pixel(double value) noexcept {
    const double p = std::round((value + 1.0) * 127.5);
    if (!(p > 0.0)) return 0;  // also maps NaN to 0
    if (p >= 255.0) return 255;
    return static_cast<std::uint8_t>(p);
}

double from_pixel(std::uint8_t pixel) noexcept { return static_cast<double>(pixel) / 127.5 - 1.0; }

std::vector<std::uint8_t> to_pixels(const Image& image) {
    std::vector<std::uint8_t> out(image.size());
    std::transform(image.data().begin(), image.data().end(), out.begin(), to_pixel);
    return out;
}

Image from_pixels(Shape shape, std::span<const std::uint8_t> pixels) {
    std::vector<double> data(pixels.size());
    std::transform(pixels.begin(), pixels.end(), data.begin(), from_pixel);
    return Image(shape, std::move(data));
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double max_abs_diff(const Image& a, const Image& b) {
    require_same_shape(a.shape(), b.shape(), "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void require_same_shape(const Shape& expected, const Shape& actual, const char* what) {
    if (!(expected == actual)) {
        throw InvalidArgument(std::string(what) + ": shape mismatch, expected " + expected.to_string() + " got " +
                              actual.to_string());
    }
}

}  // namespace reprodiff

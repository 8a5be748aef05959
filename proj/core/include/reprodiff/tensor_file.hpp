// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "reprodiff/image.hpp"

namespace reprodiff {

/// Dense float32 tensor as stored in a TensorFile.
///
/// On disk (little-endian throughout):
///   "DRTF" | u32 version | u32 ndim | ndim x u64 dims | prod(dims) x f32 payload
struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<float> values;

    [[nodiscard]] std::uint64_t element_count() const noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline constexpr std::uint32_t kTensorFileVersion = 1;

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
[[nodiscard]] Tensor read_tensor(const std::filesystem::path& path);

/// Stacks equally shaped images into a (N, H, W, C) tensor.
[[nodiscard]] Tensor images_to_tensor(const std::vector<Image>& images);
/// Splits a (N, H, W, C) tensor back into images.
[[nodiscard]] std::vector<Image> tensor_to_images(const Tensor& tensor);

}  // namespace reprodiff

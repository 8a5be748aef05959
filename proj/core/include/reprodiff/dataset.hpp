// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "reprodiff/image.hpp"
#include "reprodiff/rng.hpp"

namespace reprodiff {

/// The support {y_i} of the uniform delta-mixture data distribution.
///
/// Every image carries a source id (its position in the originally loaded
/// collection) so that seeded subsetting is stable under repeated subsetting.
class Dataset {
public:
    Dataset(std::vector<Image> images, std::optional<std::vector<int>> labels = std::nullopt);
    /// An empty `source_ids` means positions 0..N-1.
    Dataset(std::vector<Image> images, std::vector<std::uint64_t> source_ids,
            std::optional<std::vector<int>> labels);

    [[nodiscard]] std::size_t size() const noexcept { return images_.size(); }
    [[nodiscard]] const Shape& shape() const noexcept { return images_.front().shape(); }
    [[nodiscard]] std::size_t dim() const noexcept { return shape().size(); }

    [[nodiscard]] const std::vector<Image>& images() const noexcept { return images_; }
    [[nodiscard]] const Image& operator[](std::size_t i) const noexcept { return images_[i]; }
    [[nodiscard]] const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::vector<std::uint64_t>& source_ids() const noexcept { return source_ids_; }

    /// Seeded subset of `count` images.
    ///
    /// Each image is ranked by a hash of (seed, source id) and the `count`
    /// lowest ranks are kept in rank order. Subsetting to n and then to m <= n
    /// with the same seed equals subsetting directly to m.
    [[nodiscard]] Dataset subset(std::size_t count, std::uint64_t seed) const;
    /// First `count` images in their current order.
    [[nodiscard]] Dataset head(std::size_t count) const;

    /// Row-major N x d copy of all pixels, the layout the denoiser scans.
    [[nodiscard]] std::vector<double> packed() const;

private:
    std::vector<Image> images_;
    std::vector<std::uint64_t> source_ids_;
    std::optional<std::vector<int>> labels_;
};

struct LoadOptions {
    std::optional<std::size_t> limit;
    std::optional<std::uint64_t> shuffle_seed;
};

/// Loads a directory of 8-bit images (sorted by file name) or a single
/// (N, H, W, C) TensorFile holding canonical-domain values. An optional
/// `labels.txt` next to the images (or next to the TensorFile) supplies one
/// integer class id per line.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

/// Writes the dataset as one PNG per image plus labels.txt when labelled.
void save_dataset_images(const Dataset& dataset, const std::filesystem::path& dir);

/// Smooth random images in [-1, 1]: a per-image colour gradient plus a few
/// Gaussian blobs. Stands in for natural images in tests and demos.
[[nodiscard]] Dataset make_synthetic_dataset(std::uint64_t seed, std::size_t count, Shape shape,
                                             std::size_t num_classes = 0);

}  // namespace reprodiff

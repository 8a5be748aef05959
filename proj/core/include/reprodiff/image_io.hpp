// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "reprodiff/image.hpp"

namespace reprodiff {

/// 8-bit interleaved raster as found in image files.
struct PixelRaster {
    Shape shape;
    std::vector<std::uint8_t> pixels;
};

/// Reads an 8-bit PNG, PGM (P5) or PPM (P6) file, dispatching on extension.
[[nodiscard]] PixelRaster read_raster(const std::filesystem::path& path);
/// Writes a 1- or 3-channel raster; .png, .pgm and .ppm are supported.
void write_raster(const std::filesystem::path& path, const PixelRaster& raster);

/// Reads an image file into the canonical [-1, 1] domain.
[[nodiscard]] Image read_image(const std::filesystem::path& path);
/// Writes an image after the canonical clamp-and-round conversion.
void write_image(const std::filesystem::path& path, const Image& image);

[[nodiscard]] bool is_image_file(const std::filesystem::path& path);

/// Tiles equally shaped images into a grid `columns` wide (for previews).
[[nodiscard]] Image tile_images(const std::vector<Image>& images, std::size_t columns);

}  // namespace reprodiff

// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "reprodiff/error.hpp"

namespace reprodiff {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

PixelRaster read_png(const std::filesystem::path& path) {
    const std::string name = path.string();
    FilePtr file(std::fopen(name.c_str(), "rb"));
    if (!file) throw IoError("cannot open " + name);

    png_byte signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        throw FormatError(name + ": not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(name + ": libpng initialisation failed");
    }
    PixelRaster raster;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(name + ": corrupt PNG data");
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const auto width = png_get_image_width(png, info);
    const auto height = png_get_image_height(png, info);
    const auto channels = png_get_channels(png, info);
    raster.shape = Shape{height, width, channels};
    raster.pixels.resize(raster.shape.size());
    rows.resize(height);
    for (std::size_t r = 0; r < height; ++r) rows[r] = raster.pixels.data() + r * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return raster;
}

void write_png(const std::filesystem::path& path, const PixelRaster& raster) {
    const std::string name = path.string();
    FilePtr file(std::fopen(name.c_str(), "wb"));
    if (!file) throw IoError("cannot open " + name + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError(name + ": libpng initialisation failed");
    }
    const auto& s = raster.shape;
    std::vector<png_bytep> rows(s.height);
    for (std::size_t r = 0; r < s.height; ++r) {
        rows[r] = const_cast<png_bytep>(raster.pixels.data() + r * s.width * s.channels);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(name + ": PNG encoding failed");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(s.width), static_cast<png_uint_32>(s.height), 8,
                 s.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    return token;
}

PixelRaster read_pnm(const std::filesystem::path& path) {
    const std::string name = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + name);
    const std::string magic = next_token(in);
    std::size_t channels = 0;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw FormatError(name + ": unsupported PNM magic '" + magic + "', expected P5 or P6");
    }
    std::size_t width = 0, height = 0, maxval = 0;
    try {
        width = std::stoul(next_token(in));
        height = std::stoul(next_token(in));
        maxval = std::stoul(next_token(in));
    } catch (const std::exception&) {
        throw FormatError(name + ": malformed PNM header");
    }
    if (maxval != 255) throw FormatError(name + ": only 8-bit PNM (maxval 255) is supported");
    PixelRaster raster{Shape{height, width, channels}, {}};
    require_valid(raster.shape);
    raster.pixels.resize(raster.shape.size());
    in.read(reinterpret_cast<char*>(raster.pixels.data()), static_cast<std::streamsize>(raster.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(raster.pixels.size())) {
        throw FormatError(name + ": truncated PNM payload");
    }
    return raster;
}

void write_pnm(const std::filesystem::path& path, const PixelRaster& raster) {
    const auto& s = raster.shape;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << (s.channels == 1 ? "P5" : "P6") << '\n' << s.width << ' ' << s.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.pixels.data()), static_cast<std::streamsize>(raster.pixels.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

bool is_image_file(const std::filesystem::path& path) {
    const auto ext = lower_extension(path);
    return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

PixelRaster read_raster(const std::filesystem::path& path) {
    const auto ext = lower_extension(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".pgm" || ext == ".ppm") return read_pnm(path);
    throw FormatError(path.string() + ": unsupported image extension '" + ext + "'");
}

void write_raster(const std::filesystem::path& path, const PixelRaster& raster) {
    if (raster.shape.channels != 1 && raster.shape.channels != 3) {
        throw InvalidArgument(path.string() + ": only 1- or 3-channel images can be written");
    }
    if (raster.pixels.size() != raster.shape.size()) throw InvalidArgument("write_raster: pixel count mismatch");
    const auto ext = lower_extension(path);
    if (ext == ".png") return write_png(path, raster);
    if (ext == ".pgm" || ext == ".ppm") {
        if ((ext == ".pgm") != (raster.shape.channels == 1)) {
            throw InvalidArgument(path.string() + ": channel count does not match the extension");
        }
        return write_pnm(path, raster);
    }
    throw InvalidArgument(path.string() + ": unsupported image extension '" + ext + "'");
}

Image read_image(const std::filesystem::path& path) {
    const auto raster = read_raster(path);
    return from_pixels(raster.shape, raster.pixels);
}

void write_image(const std::filesystem::path& path, const Image& image) {
    write_raster(path, PixelRaster{image.shape(), to_pixels(image)});
}

Image tile_images(const std::vector<Image>& images, std::size_t columns) {
    if (images.empty() || columns == 0) throw InvalidArgument("tile_images: nothing to tile");
    const Shape cell = images.front().shape();
    const std::size_t cols = std::min(columns, images.size());
    const std::size_t rows = (images.size() + cols - 1) / cols;
    Image grid(Shape{rows * cell.height, cols * cell.width, cell.channels}, -1.0);
    for (std::size_t k = 0; k < images.size(); ++k) {
        require_same_shape(cell, images[k].shape(), "tile_images");
        const std::size_t r0 = (k / cols) * cell.height;
        const std::size_t c0 = (k % cols) * cell.width;
        for (std::size_t r = 0; r < cell.height; ++r)
            for (std::size_t c = 0; c < cell.width; ++c)
                for (std::size_t ch = 0; ch < cell.channels; ++ch) grid.at(r0 + r, c0 + c, ch) = images[k].at(r, c, ch);
    }
    return grid;
}

}  // namespace reprodiff

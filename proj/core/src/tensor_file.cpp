// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/tensor_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "reprodiff/error.hpp"

namespace reprodiff {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'R', 'T', 'F'};

template <typename T>
void put_le(std::string& out, T value) {
    using U = std::make_unsigned_t<std::conditional_t<std::is_same_v<T, float>, std::uint32_t, T>>;
    U bits;
    std::memcpy(&bits, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const unsigned char* in) {
    using U = std::conditional_t<std::is_same_v<T, float>, std::uint32_t, T>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(in[i]) << (8 * i));
    T value;
    std::memcpy(&value, &bits, sizeof(T));
    return value;
}

std::string hex_bytes(const unsigned char* bytes, std::size_t n) {
    std::ostringstream os;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) os << ' ';
        os << "0x" << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(bytes[i]);
    }
    return os.str();
}

}  // namespace

std::uint64_t Tensor::element_count() const noexcept {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    if (tensor.values.size() != tensor.element_count()) {
        throw InvalidArgument("write_tensor: " + std::to_string(tensor.values.size()) +
                              " values do not match the product of dims");
    }
    std::string buffer(kMagic.begin(), kMagic.end());
    buffer.reserve(16 + 8 * tensor.dims.size() + 4 * tensor.values.size());
    put_le<std::uint32_t>(buffer, kTensorFileVersion);
    put_le<std::uint32_t>(buffer, static_cast<std::uint32_t>(tensor.dims.size()));
    for (auto d : tensor.dims) put_le<std::uint64_t>(buffer, d);
    for (float v : tensor.values) put_le<float>(buffer, v);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
    const std::string name = path.string();

    if (raw.size() < 12) throw FormatError(name + ": truncated header (" + std::to_string(raw.size()) + " bytes)");
    if (std::memcmp(raw.data(), kMagic.data(), kMagic.size()) != 0) {
        throw FormatError(name + ": bad magic " + hex_bytes(bytes, 4) + ", expected \"DRTF\"");
    }
    const auto version = get_le<std::uint32_t>(bytes + 4);
    if (version != kTensorFileVersion) {
        throw FormatError(name + ": unsupported version " + std::to_string(version) + ", expected " +
                          std::to_string(kTensorFileVersion));
    }
    const auto ndim = get_le<std::uint32_t>(bytes + 8);
    const std::size_t header = 12 + std::size_t{8} * ndim;
    if (raw.size() < header) throw FormatError(name + ": truncated dims block");

    Tensor tensor;
    tensor.dims.resize(ndim);
    for (std::uint32_t i = 0; i < ndim; ++i) tensor.dims[i] = get_le<std::uint64_t>(bytes + 12 + 8 * i);
    const std::uint64_t count = tensor.element_count();
    const std::uint64_t expected = header + count * 4;
    if (raw.size() < expected) {
        throw FormatError(name + ": truncated payload, expected " + std::to_string(count * 4) + " bytes, found " +
                          std::to_string(raw.size() - header));
    }
    if (raw.size() > expected) {
        throw FormatError(name + ": " + std::to_string(raw.size() - expected) + " trailing bytes after payload");
    }
    tensor.values.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) tensor.values[i] = get_le<float>(bytes + header + 4 * i);
    return tensor;
}

Tensor images_to_tensor(const std::vector<Image>& images) {
    if (images.empty()) throw InvalidArgument("images_to_tensor: empty image list");
    const Shape shape = images.front().shape();
    Tensor t;
    t.dims = {images.size(), shape.height, shape.width, shape.channels};
    t.values.reserve(images.size() * shape.size());
    for (const auto& img : images) {
        require_same_shape(shape, img.shape(), "images_to_tensor");
        for (double v : img.values()) t.values.push_back(static_cast<float>(v));
    }
    return t;
}

std::vector<Image> tensor_to_images(const Tensor& tensor) {
    if (tensor.dims.size() != 4) {
        throw FormatError("expected a 4-d (N,H,W,C) tensor, got " + std::to_string(tensor.dims.size()) + " dims");
    }
    const Shape shape{tensor.dims[1], tensor.dims[2], tensor.dims[3]};
    require_valid(shape);
    std::vector<Image> images;
    images.reserve(tensor.dims[0]);
    for (std::uint64_t n = 0; n < tensor.dims[0]; ++n) {
        const auto* first = tensor.values.data() + n * shape.size();
        images.emplace_back(shape, std::vector<double>(first, first + shape.size()));
    }
    return images;
}

}  // namespace reprodiff

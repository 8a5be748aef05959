// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <limits>

#include "doctest.h"
#include "reprodiff/error.hpp"
#include "reprodiff/tensor_file.hpp"
#include "test_support.hpp"

using namespace reprodiff;
using reprodiff::testing::read_file;
using reprodiff::testing::TempDir;
using reprodiff::testing::write_file;

namespace {

Tensor sample_tensor() {
    Tensor t;
    t.dims = {2, 3};
    t.values = {0.0f, -1.5f, 3.25f, std::numeric_limits<float>::denorm_min(), -0.0f, 1e30f};
    return t;
}

std::string expect_format_error(const std::filesystem::path& path) {
    try {
        (void)read_tensor(path);
    } catch (const FormatError& e) {
        return e.what();
    }
    FAIL("expected FormatError");
    return {};
}

}  // namespace

TEST_CASE("write then read is bit-identical") {
    TempDir dir("tensor");
    const Tensor t = sample_tensor();
    write_tensor(dir / "t.drtf", t);
    const Tensor back = read_tensor(dir / "t.drtf");
    CHECK(back.dims == t.dims);
    REQUIRE(back.values.size() == t.values.size());
    CHECK(std::memcmp(back.values.data(), t.values.data(), t.values.size() * sizeof(float)) == 0);
}

TEST_CASE("on-disk layout is little-endian") {
    TempDir dir("tensor");
    Tensor t;
    t.dims = {1};
    t.values = {1.0f};
    write_tensor(dir / "one.drtf", t);
    const std::string bytes = read_file(dir / "one.drtf");
    const std::string expected("DRTF"
                               "\x01\x00\x00\x00"
                               "\x01\x00\x00\x00"
                               "\x01\x00\x00\x00\x00\x00\x00\x00"
                               "\x00\x00\x80\x3f",
                               24);
    CHECK(bytes == expected);
}

TEST_CASE("bad magic names the offending bytes") {
    TempDir dir("tensor");
    write_tensor(dir / "t.drtf", sample_tensor());
    std::string bytes = read_file(dir / "t.drtf");
    bytes[0] = 'X';
    bytes[1] = 'Y';
    write_file(dir / "bad.drtf", bytes);
    const std::string msg = expect_format_error(dir / "bad.drtf");
    CHECK(msg.find("bad magic") != std::string::npos);
    CHECK(msg.find("0x58 0x59 0x54 0x46") != std::string::npos);
}

TEST_CASE("version mismatch is rejected") {
    TempDir dir("tensor");
    write_tensor(dir / "t.drtf", sample_tensor());
    std::string bytes = read_file(dir / "t.drtf");
    bytes[4] = 2;
    write_file(dir / "v2.drtf", bytes);
    CHECK(expect_format_error(dir / "v2.drtf").find("version") != std::string::npos);
}

TEST_CASE("truncated payload and trailing bytes are rejected") {
    TempDir dir("tensor");
    write_tensor(dir / "t.drtf", sample_tensor());
    const std::string bytes = read_file(dir / "t.drtf");
    write_file(dir / "short.drtf", bytes.substr(0, bytes.size() - 3));
    CHECK(expect_format_error(dir / "short.drtf").find("truncated payload") != std::string::npos);
    write_file(dir / "header.drtf", bytes.substr(0, 6));
    CHECK(expect_format_error(dir / "header.drtf").find("truncated") != std::string::npos);
    write_file(dir / "long.drtf", bytes + "zz");
    CHECK(expect_format_error(dir / "long.drtf").find("trailing") != std::string::npos);
}

TEST_CASE("missing file is an I/O error") {
    TempDir dir("tensor");
    CHECK_THROWS_AS((void)read_tensor(dir / "absent.drtf"), IoError);
}

TEST_CASE("value count must match dims") {
    TempDir dir("tensor");
    Tensor t;
    t.dims = {2, 2};
    t.values = {1.0f};
    CHECK_THROWS_AS(write_tensor(dir / "x.drtf", t), InvalidArgument);
}

TEST_CASE("image stacks round trip through (N,H,W,C) tensors") {
    std::vector<Image> images;
    for (int i = 0; i < 3; ++i) images.push_back(reprodiff::testing::random_image(1, i, Shape{2, 3, 2}));
    const Tensor t = images_to_tensor(images);
    CHECK(t.dims == std::vector<std::uint64_t>{3, 2, 3, 2});
    const auto back = tensor_to_images(t);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < back[i].size(); ++j) {
            CHECK(back[i][j] == static_cast<double>(static_cast<float>(images[i][j])));
        }
    }
    Tensor flat;
    flat.dims = {4};
    flat.values.assign(4, 0.0f);
    CHECK_THROWS_AS((void)tensor_to_images(flat), FormatError);
}

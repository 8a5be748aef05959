// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "reprodiff/dataset.hpp"
#include "reprodiff/error.hpp"
#include "reprodiff/image_io.hpp"
#include "reprodiff/tensor_file.hpp"
#include "test_support.hpp"

using namespace reprodiff;
using reprodiff::testing::TempDir;

namespace {

std::string load_error(const std::filesystem::path& path, const LoadOptions& opts = {}) {
    try {
        (void)load_dataset(path, opts);
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected an error");
    return {};
}

}  // namespace

TEST_CASE("directory of three images loads in name order") {
    TempDir dir("ds");
    const Dataset src = make_synthetic_dataset(1, 3, Shape{32, 32, 3});
    save_dataset_images(src, dir.path());
    const Dataset ds = load_dataset(dir.path());
    CHECK(ds.size() == 3);
    CHECK(ds.shape() == Shape{32, 32, 3});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(to_pixels(ds[i]) == to_pixels(src[i]));
    }
    CHECK_FALSE(ds.labels().has_value());
}

TEST_CASE("limit with a shuffle seed is deterministic") {
    TempDir dir("ds");
    save_dataset_images(make_synthetic_dataset(2, 6, Shape{4, 4, 1}, 3), dir.path());
    LoadOptions opts;
    opts.limit = 2;
    opts.shuffle_seed = 17;
    const Dataset a = load_dataset(dir.path(), opts);
    const Dataset b = load_dataset(dir.path(), opts);
    CHECK(a.size() == 2);
    CHECK(a.images() == b.images());
    CHECK(a.labels() == b.labels());
    CHECK(a.source_ids() == b.source_ids());
}

TEST_CASE("labels travel with their images") {
    TempDir dir("ds");
    const Dataset src = make_synthetic_dataset(3, 5, Shape{4, 4, 3}, 2);
    save_dataset_images(src, dir.path());
    const Dataset ds = load_dataset(dir.path());
    REQUIRE(ds.labels().has_value());
    CHECK(*ds.labels() == *src.labels());
    const Dataset sub = ds.subset(3, 8);
    for (std::size_t i = 0; i < sub.size(); ++i) {
        CHECK((*sub.labels())[i] == (*src.labels())[sub.source_ids()[i]]);
    }
}

TEST_CASE("TensorFile datasets and sidecar labels") {
    TempDir dir("ds");
    const Dataset src = make_synthetic_dataset(4, 4, Shape{2, 2, 3});
    write_tensor(dir / "train.drtf", images_to_tensor(src.images()));
    reprodiff::testing::write_file(dir / "train.labels.txt", "0\n1\n1\n0\n");
    const Dataset ds = load_dataset(dir / "train.drtf");
    CHECK(ds.size() == 4);
    CHECK(*ds.labels() == std::vector<int>{0, 1, 1, 0});
}

TEST_CASE("load errors name the problem") {
    TempDir dir("ds");
    CHECK(load_error(dir / "missing").find("missing") != std::string::npos);

    save_dataset_images(make_synthetic_dataset(1, 2, Shape{4, 4, 3}), dir.path());
    LoadOptions opts;
    opts.limit = 3;
    CHECK(load_error(dir.path(), opts).find("limit 3") != std::string::npos);

    write_image(dir / "odd.png", Image(Shape{5, 5, 3}));
    CHECK(load_error(dir.path()).find("odd.png") != std::string::npos);

    TempDir broken("ds");
    save_dataset_images(make_synthetic_dataset(1, 2, Shape{4, 4, 3}), broken.path());
    reprodiff::testing::write_file(broken / "img_000000.png", "garbage");
    CHECK(load_error(broken.path()).find("img_000000.png") != std::string::npos);

    TempDir labelled("ds");
    save_dataset_images(make_synthetic_dataset(1, 2, Shape{4, 4, 3}), labelled.path());
    reprodiff::testing::write_file(labelled / "labels.txt", "1\n");
    CHECK(load_error(labelled.path()).find("labels.txt") != std::string::npos);
}

TEST_CASE("subsetting commutes with itself") {
    const Dataset base = make_synthetic_dataset(9, 40, Shape{2, 2, 1});
    for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
        const Dataset direct = base.subset(7, seed);
        const Dataset nested = base.subset(20, seed).subset(7, seed);
        CHECK(direct.source_ids() == nested.source_ids());
        CHECK(direct.images() == nested.images());
    }
    CHECK(base.subset(7, 0).source_ids() != base.subset(7, 1).source_ids());
    CHECK_THROWS_AS((void)base.subset(41, 0), InvalidArgument);
    CHECK_THROWS_AS((void)base.subset(0, 0), InvalidArgument);
}

TEST_CASE("dataset invariants") {
    CHECK_THROWS_AS(Dataset(std::vector<Image>{}), InvalidArgument);
    CHECK_THROWS_AS(Dataset({Image(Shape{2, 2, 1}), Image(Shape{2, 2, 3})}), InvalidArgument);
    CHECK_THROWS_AS(Dataset({Image(Shape{2, 2, 1})}, std::vector<int>{0, 1}), InvalidArgument);
    const Dataset ds({Image(Shape{1, 2, 1}, {1.0, 2.0}), Image(Shape{1, 2, 1}, {3.0, 4.0})});
    CHECK(ds.packed() == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(ds.source_ids() == std::vector<std::uint64_t>{0, 1});
}

TEST_CASE("synthetic images stay in the canonical domain") {
    const Dataset ds = make_synthetic_dataset(5, 10, Shape{8, 8, 3}, 4);
    for (const auto& img : ds.images()) {
        for (double v : img.values()) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(make_synthetic_dataset(5, 10, Shape{8, 8, 3}, 4).images() == ds.images());
    for (int label : *ds.labels()) CHECK((label >= 0 && label < 4));
}

// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "reprodiff/error.hpp"
#include "reprodiff/metrics.hpp"
#include "reprodiff/tensor_file.hpp"
#include "test_support.hpp"

using namespace reprodiff;
using reprodiff::testing::antipode;
using reprodiff::testing::constructed_score_sets;
using reprodiff::testing::one_hot_image;
using reprodiff::testing::random_image;
using reprodiff::testing::TempDir;

namespace {

const Shape kShape{8, 8, 3};

std::vector<std::int64_t> iota_ids(std::size_t n, std::int64_t first = 0) {
    std::vector<std::int64_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = first + static_cast<std::int64_t>(i);
    return ids;
}

std::vector<Image> noise_images(std::uint64_t seed, std::size_t n, Shape shape) {
    std::vector<Image> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_image(seed, i, shape));
    return out;
}

SampleSet reversed(const SampleSet& s) {
    std::vector<Image> images(s.images().rbegin(), s.images().rend());
    std::vector<std::int64_t> ids(s.noise_ids().rbegin(), s.noise_ids().rend());
    return SampleSet(s.model_id(), images, ids);
}

}  // namespace

TEST_CASE("self similarity is one for every backend") {
    const Image x = random_image(1, 0, Shape{16, 16, 3});
    CHECK(similarity(SimilarityBackend::pixel_cosine(), x, x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(similarity(SimilarityBackend::patch_descriptor(), x, x) == doctest::Approx(1.0).epsilon(1e-12));
    auto table = std::make_shared<EmbeddingTable>(std::vector<std::string>{"a"}, 2, std::vector<float>{0.3f, 0.4f});
    CHECK(similarity(SimilarityBackend::external(table), x, x, "a", "a") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pixel cosine antipode is minus one") {
    for (std::uint64_t k = 0; k < 5; ++k) {
        const Image x = random_image(2, k, kShape);
        CHECK(similarity(SimilarityBackend::pixel_cosine(), x, antipode(x)) == doctest::Approx(-1.0).epsilon(1e-12));
    }
}

TEST_CASE("pixel cosine ignores positive affine rescaling") {
    const Image x = random_image(3, 0, kShape);
    const Image y = random_image(3, 1, kShape);
    Image z = y;
    for (double& v : z.values()) v = 0.37 * v - 0.2;
    const auto backend = SimilarityBackend::pixel_cosine();
    CHECK(similarity(backend, x, z) == doctest::Approx(similarity(backend, x, y)).epsilon(1e-12));
}

TEST_CASE("external embeddings give hand-computed cosines") {
    const double r = 1.0 / std::sqrt(2.0);
    auto table = std::make_shared<EmbeddingTable>(
        std::vector<std::string>{"e1", "e2", "mid"}, 2,
        std::vector<float>{1.0f, 0.0f, 0.0f, 1.0f, static_cast<float>(r), static_cast<float>(r)});
    const auto backend = SimilarityBackend::external(table);
    CHECK(backend.threshold == 0.6);
    const Image any(Shape{1, 1, 1});
    CHECK(std::abs(similarity(backend, any, any, "e1", "e2")) < 1e-7);
    CHECK(similarity(backend, any, any, "e1", "mid") == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(similarity(backend, any, any, "e2", "mid") == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK_THROWS_AS((void)similarity(backend, any, any, "e1", "nope"), InvalidArgument);
}

TEST_CASE("embedding tables load from disk") {
    TempDir dir("emb");
    Tensor t;
    t.dims = {2, 3};
    t.values = {1, 0, 0, 0, 1, 0};
    write_tensor(dir / "table.drtf", t);
    reprodiff::testing::write_file(dir / "ids.txt", "x\ny\n");
    const EmbeddingTable table = EmbeddingTable::load(dir / "table.drtf", dir / "ids.txt");
    CHECK(table.size() == 2);
    CHECK(table.dim() == 3);
    CHECK(table.contains("y"));
    CHECK(table.row("y")[1] == 1.0f);
    reprodiff::testing::write_file(dir / "short.txt", "x\n");
    CHECK_THROWS_AS((void)EmbeddingTable::load(dir / "table.drtf", dir / "short.txt"), FormatError);
}

TEST_CASE("constant images have no pixel descriptor") {
    const Image flat(kShape);
    CHECK_THROWS_AS((void)similarity(SimilarityBackend::pixel_cosine(), flat, flat), InvalidArgument);
}

TEST_CASE("rp_score on constructed pairs") {
    const auto sets = constructed_score_sets();
    const auto backend = SimilarityBackend::pixel_cosine();
    CHECK(rp_score(sets[0], sets[0], backend) == 1.0);
    CHECK(rp_score(sets[0], sets[1], backend) == 0.75);
    CHECK(rp_score(sets[0], sets[2], backend) == 0.5);
}

TEST_CASE("independent noise images are never reproductions") {
    const Shape big{32, 32, 3};
    const SampleSet a("a", noise_images(10, 1000, big), iota_ids(1000));
    const SampleSet b("b", noise_images(11, 1000, big), iota_ids(1000));
    CHECK(rp_score(a, b, SimilarityBackend::pixel_cosine(0.99), 2) <= 0.001);
}

TEST_CASE("mae_score thresholds the 8-bit mean absolute difference") {
    const Shape shape{4, 4, 3};
    std::vector<std::uint8_t> base(shape.size());
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = static_cast<std::uint8_t>(20 + (7 * i) % 200);
    std::vector<std::uint8_t> shifted = base;
    for (auto& p : shifted) p = static_cast<std::uint8_t>(p + 10);
    const Image a = from_pixels(shape, base);
    const Image b = from_pixels(shape, shifted);
    CHECK(pixel_mae(a, b) == 10.0);
    const SampleSet sa("a", {a}, {0});
    const SampleSet sb("b", {b}, {0});
    CHECK(mae_score(sa, sb) == 1.0);
    CHECK(mae_score(sa, sa) == 1.0);

    Image white(shape);
    Image black(shape);
    for (double& v : white.values()) v = 1.0;
    for (double& v : black.values()) v = -1.0;
    CHECK(pixel_mae(white, black) == 255.0);
    CHECK(mae_score(SampleSet("w", {white}, {0}), SampleSet("k", {black}, {0})) == 0.0);
}

TEST_CASE("gl_score on verbatim, noise and mixed sample sets") {
    const Dataset train = make_synthetic_dataset(4, 20, kShape);
    const auto backend = SimilarityBackend::pixel_cosine(0.99);
    const SampleSet verbatim("copies", train.images(), iota_ids(train.size()));
    CHECK(gl_score(verbatim, train, backend) == 0.0);

    const SampleSet noise("noise", noise_images(12, 1000, kShape), iota_ids(1000));
    CHECK(gl_score(noise, train, backend, 2) >= 0.999);

    std::vector<Image> mixed;
    for (std::size_t i = 0; i < 10; ++i) mixed.push_back(train[i]);
    for (std::size_t i = 0; i < 10; ++i) mixed.push_back(random_image(13, i, kShape));
    const double gl = gl_score(SampleSet("mixed", mixed, iota_ids(20)), train, backend);
    CHECK(std::abs(gl - 0.5) <= 1.0 / 20.0);
}

TEST_CASE("rp_cond pairs on noise id and class") {
    const auto images = noise_images(14, 6, kShape);
    const SampleSet a("a", images, {0, 0, 1, 1, 2, 2}, std::vector<int>{0, 1, 0, 1, 0, 1});
    CHECK(rp_cond(a, a, SimilarityBackend::pixel_cosine()) == 1.0);
    const SampleSet unlabelled("u", images, iota_ids(6));
    CHECK_THROWS_AS((void)rp_cond(a, unlabelled, SimilarityBackend::pixel_cosine()), InvalidArgument);
    // Swapping the classes of noise id 2 breaks both of its matches.
    const SampleSet swapped("b", images, {0, 0, 1, 1, 2, 2}, std::vector<int>{0, 1, 0, 1, 1, 0});
    CHECK(rp_cond(a, swapped, SimilarityBackend::pixel_cosine()) == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("rp_between takes the best class per noise id") {
    const std::size_t n_ids = 10;
    const std::size_t n_classes = 10;
    const auto uncond = noise_images(15, n_ids, kShape);
    std::vector<Image> cond;
    std::vector<std::int64_t> ids;
    std::vector<int> labels;
    for (std::size_t id = 0; id < n_ids; ++id) {
        for (std::size_t c = 0; c < n_classes; ++c) {
            const bool copy = id < 7 && c == (id * 3) % n_classes;
            cond.push_back(copy ? uncond[id] : random_image(16, id * n_classes + c, kShape));
            ids.push_back(static_cast<std::int64_t>(id));
            labels.push_back(static_cast<int>(c));
        }
    }
    const SampleSet u("u", uncond, iota_ids(n_ids));
    const SampleSet c("c", cond, ids, labels);
    CHECK(rp_between(u, c, SimilarityBackend::pixel_cosine()) == doctest::Approx(0.7));

    std::vector<Image> all_copies = cond;
    for (std::size_t id = 0; id < n_ids; ++id) all_copies[id * n_classes + 5] = uncond[id];
    CHECK(rp_between(u, SampleSet("c2", all_copies, ids, labels), SimilarityBackend::pixel_cosine()) == 1.0);
    CHECK_THROWS_AS((void)rp_between(u, u, SimilarityBackend::pixel_cosine()), InvalidArgument);
}

TEST_CASE("score matrices") {
    const auto sets = constructed_score_sets();
    const auto backend = SimilarityBackend::pixel_cosine();
    const ScoreMatrix single = score_matrix({sets[0]}, backend, PairMetric::RP);
    CHECK(single.entries == std::vector<double>{1.0});
    const ScoreMatrix twin = score_matrix({sets[0], SampleSet("twin", sets[0].images(), sets[0].noise_ids())},
                                          backend, PairMetric::MAE);
    CHECK(twin.entries == std::vector<double>{1, 1, 1, 1});
    const std::vector<double> expected{1.0, 0.75, 0.5, 0.75, 1.0, 0.75, 0.5, 0.75, 1.0};
    CHECK(score_matrix(sets, backend, PairMetric::RP).entries == expected);
    CHECK(score_matrix(sets, backend, PairMetric::MAE).entries == expected);
    CHECK(score_matrix(sets, backend, PairMetric::RP).to_csv() ==
          "model,ref,one_flip,two_flip\n"
          "ref,1.000000,0.750000,0.500000\n"
          "one_flip,0.750000,1.000000,0.750000\n"
          "two_flip,0.500000,0.750000,1.000000\n");
}

TEST_CASE("scores are symmetric and ignore sample order") {
    const auto sets = constructed_score_sets();
    const auto backend = SimilarityBackend::pixel_cosine();
    for (const auto& a : sets) {
        for (const auto& b : sets) {
            CHECK(rp_score(a, b, backend) == rp_score(b, a, backend));
            CHECK(mae_score(a, b) == mae_score(b, a));
            CHECK(rp_score(reversed(a), b, backend) == rp_score(a, b, backend));
            CHECK(mae_score(a, reversed(b)) == mae_score(a, b));
        }
    }
}

TEST_CASE("raising the threshold never increases a score") {
    const Dataset train = make_synthetic_dataset(6, 12, kShape);
    std::vector<Image> near;
    for (std::size_t i = 0; i < 12; ++i) {
        Image x = train[i];
        const Image e = random_image(17, i, kShape, 0.05 * static_cast<double>(i));
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += e[j];
        near.push_back(x);
    }
    const SampleSet a("a", train.images(), iota_ids(12));
    const SampleSet b("b", near, iota_ids(12));
    double prev_rp = 1.0;
    double prev_gl_complement = 1.0;
    for (double tau = -0.5; tau < 1.0; tau += 0.05) {
        const auto backend = SimilarityBackend::pixel_cosine(tau);
        const double rp = rp_score(a, b, backend);
        const double hit = 1.0 - gl_score(b, train, backend);
        CHECK(rp <= prev_rp);
        CHECK(hit <= prev_gl_complement);
        CHECK(rp >= 0.0);
        prev_rp = rp;
        prev_gl_complement = hit;
    }
    double prev_mae = 0.0;
    for (double thr = 0.0; thr < 60.0; thr += 2.0) {
        const double m = mae_score(a, b, thr);
        CHECK(m >= prev_mae);
        prev_mae = m;
    }
}

TEST_CASE("sample set validation and persistence") {
    TempDir dir("samples");
    const auto images = noise_images(18, 3, kShape);
    CHECK_THROWS_AS(SampleSet("a", images, {0, 1}), InvalidArgument);
    CHECK_THROWS_AS(SampleSet("a", images, {0, 1, 1}), InvalidArgument);
    CHECK_NOTHROW(SampleSet("a", images, {0, 1, 1}, std::vector<int>{0, 0, 1}));
    CHECK_THROWS_AS(SampleSet("a,b", images, {0, 1, 2}), InvalidArgument);
    CHECK_THROWS_AS((void)rp_score(SampleSet("a", images, {0, 1, 2}), SampleSet("b", images, {5, 6, 7}),
                                   SimilarityBackend::pixel_cosine()),
                    InvalidArgument);

    const SampleSet s("heun2-64", images, {4, 9, 2}, std::vector<int>{1, 0, 1});
    CHECK(s.key(1) == "heun2-64:9:0");
    s.save(dir / "set");
    const SampleSet back = SampleSet::load(dir / "set");
    CHECK(back.model_id() == "heun2-64");
    CHECK(back.noise_ids() == s.noise_ids());
    CHECK(back.labels() == s.labels());
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < images[i].size(); ++j) {
            CHECK(back.images()[i][j] == static_cast<double>(static_cast<float>(images[i][j])));
        }
    }
}

TEST_CASE("nearest training image by pixel MAE") {
    const Dataset train = make_synthetic_dataset(7, 10, kShape);
    const auto [idx, mae] = nearest_train_mae(train[6], train);
    CHECK(idx == 6);
    CHECK(mae == 0.0);
    CHECK(one_hot_image(0, Shape{1, 1, 1})[0] == 1.0);
}

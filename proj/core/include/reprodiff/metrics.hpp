// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reprodiff/dataset.hpp"
#include "reprodiff/image.hpp"

namespace reprodiff {

/// Precomputed descriptors (e.g. copy-detection embeddings computed offline),
/// one row per id.
class EmbeddingTable {
public:
    EmbeddingTable(std::vector<std::string> ids, std::size_t dim, std::vector<float> rows);

    /// Reads an (N, D) TensorFile plus a newline-separated file of N ids.
    static EmbeddingTable load(const std::filesystem::path& table, const std::filesystem::path& ids);

    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] bool contains(std::string_view id) const;
    /// Throws InvalidArgument naming the id when it is missing.
    [[nodiscard]] std::span<const float> row(std::string_view id) const;

private:
    std::vector<std::string> ids_;
    std::size_t dim_;
    std::vector<float> rows_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class BackendKind { PixelCosine, PatchDescriptor, ExternalEmbedding };

[[nodiscard]] std::string_view to_string(BackendKind kind) noexcept;
[[nodiscard]] BackendKind parse_backend_kind(std::string_view text);
/// 0.6 for external embeddings (the copy-detection convention), 0.99 otherwise.
[[nodiscard]] double default_threshold(BackendKind kind) noexcept;

/// Cosine similarity over a pluggable descriptor, with the decision threshold
/// tau that turns similarities into "same image" votes.
///
///   PixelCosine       flat pixels, mean-centred
///   PatchDescriptor   per patch and channel: mean, variance, gradient energy
///   ExternalEmbedding rows of an EmbeddingTable looked up by sample id
struct SimilarityBackend {
    BackendKind kind = BackendKind::PixelCosine;
    double threshold = 0.99;
    std::size_t patch_size = 8;
    std::size_t patch_stride = 4;
    std::shared_ptr<const EmbeddingTable> embeddings;

    static SimilarityBackend pixel_cosine(double threshold = 0.99);
    static SimilarityBackend patch_descriptor(std::size_t patch = 8, std::size_t stride = 4, double threshold = 0.99);
    static SimilarityBackend external(std::shared_ptr<const EmbeddingTable> table, double threshold = 0.6);

    /// Unit-norm descriptor. `id` is only consulted by ExternalEmbedding.
    /// Throws InvalidArgument for a zero-norm descriptor.
    [[nodiscard]] std::vector<double> describe(const Image& image, std::string_view id = {}) const;
};

/// Cosine of the two descriptors, clamped to [-1, 1].
[[nodiscard]] double similarity(const SimilarityBackend& backend, const Image& a, const Image& b,
                                std::string_view id_a = {}, std::string_view id_b = {});

/// Mean absolute difference in 8-bit pixel space after the canonical conversion.
[[nodiscard]] double pixel_mae(const Image& a, const Image& b);

/// Generated images from one model, aligned with other sets by noise id.
/// (noise_id, label) pairs are unique within a set.
class SampleSet {
public:
    SampleSet(std::string model_id, std::vector<Image> images, std::vector<std::int64_t> noise_ids,
              std::optional<std::vector<int>> labels = std::nullopt);

    [[nodiscard]] const std::string& model_id() const noexcept { return model_id_; }
    [[nodiscard]] std::size_t size() const noexcept { return images_.size(); }
    [[nodiscard]] const std::vector<Image>& images() const noexcept { return images_; }
    [[nodiscard]] const std::vector<std::int64_t>& noise_ids() const noexcept { return noise_ids_; }
    [[nodiscard]] const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }

    /// Lookup key for external embeddings: "<model_id>:<noise_id>[:<label>]".
    [[nodiscard]] std::string key(std::size_t i) const;

    /// Directory layout: samples.drtf (N,H,W,C) and manifest.txt whose first
    /// line is "model_id=<id>" followed by one "<noise_id>[,<label>]" per sample.
    void save(const std::filesystem::path& dir) const;
    static SampleSet load(const std::filesystem::path& dir);

private:
    std::string model_id_;
    std::vector<Image> images_;
    std::vector<std::int64_t> noise_ids_;
    std::optional<std::vector<int>> labels_;
};

/// Key for training image i in gl_score lookups: "train:<source id>".
[[nodiscard]] std::string train_key(const Dataset& train, std::size_t i);

/// Fraction of noise-matched pairs with similarity > tau.
[[nodiscard]] double rp_score(const SampleSet& a, const SampleSet& b, const SimilarityBackend& backend,
                              std::size_t threads = 1);
/// Fraction of noise-matched pairs with pixel-space MAE < threshold.
[[nodiscard]] double mae_score(const SampleSet& a, const SampleSet& b, double threshold = 15.0,
                               std::size_t threads = 1);
/// 1 - fraction of samples whose best match in `train` exceeds tau.
[[nodiscard]] double gl_score(const SampleSet& samples, const Dataset& train, const SimilarityBackend& backend,
                              std::size_t threads = 1);
/// rp_score over pairs matched on both noise id and class label.
[[nodiscard]] double rp_cond(const SampleSet& a, const SampleSet& b, const SimilarityBackend& backend,
                             std::size_t threads = 1);
/// Fraction of unconditional samples whose best same-noise conditional sample
/// (max over classes) exceeds tau.
[[nodiscard]] double rp_between(const SampleSet& unconditional, const SampleSet& conditional,
                                const SimilarityBackend& backend, std::size_t threads = 1);

/// Nearest training image by pixel MAE: (index, mae).
[[nodiscard]] std::pair<std::size_t, double> nearest_train_mae(const Image& x, const Dataset& train);

enum class PairMetric { RP, MAE };
[[nodiscard]] std::string_view to_string(PairMetric metric) noexcept;
[[nodiscard]] PairMetric parse_pair_metric(std::string_view text);

struct ScoreMatrix {
    std::vector<std::string> model_ids;
    std::vector<double> entries;  // row-major, model_ids.size()^2

    [[nodiscard]] std::size_t size() const noexcept { return model_ids.size(); }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return entries.at(i * size() + j); }
    /// Header "model,<ids...>", then one row per model; entries with 6 decimals.
    [[nodiscard]] std::string to_csv() const;
};

[[nodiscard]] ScoreMatrix score_matrix(const std::vector<SampleSet>& sets, const SimilarityBackend& backend,
                                       PairMetric metric, double mae_threshold = 15.0, std::size_t threads = 1);

}  // namespace reprodiff

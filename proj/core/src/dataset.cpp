// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "reprodiff/error.hpp"
#include "reprodiff/image_io.hpp"
#include "reprodiff/tensor_file.hpp"

namespace reprodiff {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint64_t> iota_ids(std::size_t n) {
    std::vector<std::uint64_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::uint64_t{0});
    return ids;
}

std::optional<std::vector<int>> read_labels(const fs::path& file, std::size_t expected) {
    if (!fs::exists(file)) return std::nullopt;
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            labels.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw FormatError(file.string() + ": bad label line '" + line + "'");
        }
    }
    if (labels.size() != expected) {
        throw FormatError(file.string() + ": " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(expected) + " images");
    }
    return labels;
}

}  // namespace

Dataset::Dataset(std::vector<Image> images, std::optional<std::vector<int>> labels)
    : Dataset(std::move(images), std::vector<std::uint64_t>{}, std::move(labels)) {}

Dataset::Dataset(std::vector<Image> images, std::vector<std::uint64_t> source_ids,
                 std::optional<std::vector<int>> labels)
    : images_(std::move(images)), source_ids_(std::move(source_ids)), labels_(std::move(labels)) {
    if (images_.empty()) throw InvalidArgument("dataset must contain at least one image");
    const Shape shape = images_.front().shape();
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (!(images_[i].shape() == shape)) {
            throw InvalidArgument("dataset image " + std::to_string(i) + " has shape " +
                                  images_[i].shape().to_string() + ", expected " + shape.to_string());
        }
    }
    if (source_ids_.empty()) source_ids_ = iota_ids(images_.size());
    if (source_ids_.size() != images_.size()) throw InvalidArgument("dataset source id count mismatch");
    if (labels_ && labels_->size() != images_.size()) {
        throw InvalidArgument("dataset has " + std::to_string(labels_->size()) + " labels for " +
                              std::to_string(images_.size()) + " images");
    }
}

Dataset Dataset::subset(std::size_t count, std::uint64_t seed) const {
    if (count == 0 || count > size()) {
        throw InvalidArgument("subset size " + std::to_string(count) + " outside [1, " + std::to_string(size()) + "]");
    }
    const std::uint64_t key = splitmix64_mix(seed ^ 0x5EEDF00DCAFEBABEULL);
    std::vector<std::pair<std::uint64_t, std::size_t>> ranked(size());
    for (std::size_t i = 0; i < size(); ++i) ranked[i] = {splitmix64_mix(key + source_ids_[i]), i};
    std::sort(ranked.begin(), ranked.end(),
              [&](const auto& a, const auto& b) {
                  return a.first != b.first ? a.first < b.first : source_ids_[a.second] < source_ids_[b.second];
              });
    std::vector<Image> images;
    std::vector<std::uint64_t> ids;
    std::optional<std::vector<int>> labels;
    if (labels_) labels.emplace();
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = ranked[k].second;
        images.push_back(images_[i]);
        ids.push_back(source_ids_[i]);
        if (labels_) labels->push_back((*labels_)[i]);
    }
    return Dataset(std::move(images), std::move(ids), std::move(labels));
}

Dataset Dataset::head(std::size_t count) const {
    if (count == 0 || count > size()) {
        throw InvalidArgument("head size " + std::to_string(count) + " outside [1, " + std::to_string(size()) + "]");
    }
    std::vector<Image> images(images_.begin(), images_.begin() + static_cast<std::ptrdiff_t>(count));
    std::vector<std::uint64_t> ids(source_ids_.begin(), source_ids_.begin() + static_cast<std::ptrdiff_t>(count));
    std::optional<std::vector<int>> labels;
    if (labels_) labels.emplace(labels_->begin(), labels_->begin() + static_cast<std::ptrdiff_t>(count));
    return Dataset(std::move(images), std::move(ids), std::move(labels));
}

std::vector<double> Dataset::packed() const {
    std::vector<double> out;
    out.reserve(size() * dim());
    for (const auto& img : images_) out.insert(out.end(), img.data().begin(), img.data().end());
    return out;
}

Dataset load_dataset(const fs::path& path, const LoadOptions& options) {
    if (!fs::exists(path)) throw IoError("dataset path does not exist: " + path.string());

    std::vector<Image> images;
    std::optional<std::vector<int>> labels;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw IoError("no image files in dataset directory " + path.string());
        for (const auto& file : files) {
            Image img;
            try {
                img = read_image(file);
            } catch (const Error& e) {
                throw IoError("unreadable dataset file " + file.string() + ": " + e.what());
            }
            if (!images.empty() && !(img.shape() == images.front().shape())) {
                throw FormatError("mixed shapes in dataset: " + file.string() + " has shape " +
                                  img.shape().to_string() + ", expected " + images.front().shape().to_string());
            }
            images.push_back(std::move(img));
        }
        labels = read_labels(path / "labels.txt", images.size());
    } else {
        images = tensor_to_images(read_tensor(path));
        if (images.empty()) throw FormatError(path.string() + ": tensor holds no images");
        labels = read_labels(path.parent_path() / (path.stem().string() + ".labels.txt"), images.size());
    }

    Dataset dataset(std::move(images), std::move(labels));
    for (const auto& img : dataset.images()) {
        if (!img.all_finite()) throw FormatError(path.string() + ": dataset contains non-finite values");
    }
    if (options.limit && *options.limit > dataset.size()) {
        throw InvalidArgument("dataset limit " + std::to_string(*options.limit) + " exceeds the " +
                              std::to_string(dataset.size()) + " images in " + path.string());
    }
    const std::size_t count = options.limit.value_or(dataset.size());
    if (options.shuffle_seed) return dataset.subset(count, *options.shuffle_seed);
    return dataset.head(count);
}

void save_dataset_images(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir);
    const auto& labels = dataset.labels();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%06zu.png", i);
        write_image(dir / name, dataset[i]);
    }
    if (labels) {
        std::ofstream out(dir / "labels.txt");
        for (int c : *labels) out << c << '\n';
    }
}

Dataset make_synthetic_dataset(std::uint64_t seed, std::size_t count, Shape shape, std::size_t num_classes) {
    require_valid(shape);
    if (count == 0) throw InvalidArgument("synthetic dataset needs at least one image");
    std::vector<Image> images;
    images.reserve(count);
    std::optional<std::vector<int>> labels;
    if (num_classes > 0) labels.emplace();

    for (std::size_t n = 0; n < count; ++n) {
        SeededRng rng(seed, n);
        Image img(shape);
        std::vector<double> base(shape.channels), gx(shape.channels), gy(shape.channels);
        for (std::size_t c = 0; c < shape.channels; ++c) {
            base[c] = 1.2 * rng.next_uniform() - 0.6;
            gx[c] = 0.8 * (rng.next_uniform() - 0.5);
            gy[c] = 0.8 * (rng.next_uniform() - 0.5);
        }
        const std::size_t blobs = 2 + static_cast<std::size_t>(rng.next_below(3));
        struct Blob {
            double cy, cx, radius;
            std::vector<double> amp;
        };
        std::vector<Blob> blob_list;
        for (std::size_t b = 0; b < blobs; ++b) {
            Blob blob{rng.next_uniform() * static_cast<double>(shape.height),
                      rng.next_uniform() * static_cast<double>(shape.width),
                      (0.1 + 0.25 * rng.next_uniform()) * static_cast<double>(std::max(shape.height, shape.width)),
                      std::vector<double>(shape.channels)};
            for (double& a : blob.amp) a = 1.6 * (rng.next_uniform() - 0.5);
            blob_list.push_back(std::move(blob));
        }
        for (std::size_t r = 0; r < shape.height; ++r) {
            const double v = shape.height > 1 ? static_cast<double>(r) / static_cast<double>(shape.height - 1) - 0.5 : 0.0;
            for (std::size_t col = 0; col < shape.width; ++col) {
                const double u = shape.width > 1 ? static_cast<double>(col) / static_cast<double>(shape.width - 1) - 0.5 : 0.0;
                for (std::size_t c = 0; c < shape.channels; ++c) {
                    double value = base[c] + gx[c] * u + gy[c] * v;
                    for (const auto& blob : blob_list) {
                        const double dy = static_cast<double>(r) - blob.cy;
                        const double dx = static_cast<double>(col) - blob.cx;
                        value += blob.amp[c] * std::exp(-(dx * dx + dy * dy) / (2.0 * blob.radius * blob.radius));
                    }
                    img.at(r, col, c) = std::clamp(value, -1.0, 1.0);
                }
            }
        }
        images.push_back(std::move(img));
        if (labels) labels->push_back(static_cast<int>(n % num_classes));
    }
    return Dataset(std::move(images), std::move(labels));
}

}  // namespace reprodiff

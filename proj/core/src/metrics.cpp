// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "reprodiff/error.hpp"
#include "reprodiff/parallel.hpp"
#include "reprodiff/tensor_file.hpp"

namespace reprodiff {

namespace fs = std::filesystem;

namespace {

std::string lowercase(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void normalize_or_throw(std::vector<double>& v, const char* backend) {
    const double n = norm2(v);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw InvalidArgument(std::string(backend) + ": zero-norm descriptor (constant or empty image)");
    }
    for (double& x : v) x /= n;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    return std::clamp(dot(a, b), -1.0, 1.0);
}

std::vector<std::size_t> patch_origins(std::size_t extent, std::size_t patch, std::size_t stride) {
    std::vector<std::size_t> origins;
    if (patch >= extent) return {0};
    for (std::size_t o = 0; o + patch <= extent; o += stride) origins.push_back(o);
    return origins;
}

struct Pair {
    std::size_t a;
    std::size_t b;
};

// Pairs samples of `a` and `b` that share a noise id (and a label when `with_labels`).
std::vector<Pair> match_pairs(const SampleSet& a, const SampleSet& b, bool with_labels) {
    if (with_labels && (!a.labels() || !b.labels())) {
        throw InvalidArgument("class-matched scores need labels on both sample sets ('" + a.model_id() + "', '" +
                              b.model_id() + "')");
    }
    std::map<std::pair<std::int64_t, int>, std::size_t> index;
    for (std::size_t j = 0; j < b.size(); ++j) {
        const int label = with_labels ? (*b.labels())[j] : 0;
        if (!index.emplace(std::pair{b.noise_ids()[j], label}, j).second) {
            throw InvalidArgument("sample set '" + b.model_id() + "' repeats noise id " +
                                  std::to_string(b.noise_ids()[j]) + "; pair on labels instead");
        }
    }
    std::vector<Pair> pairs;
    std::set<std::pair<std::int64_t, int>> seen;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int label = with_labels ? (*a.labels())[i] : 0;
        const auto key = std::pair{a.noise_ids()[i], label};
        if (!seen.insert(key).second) {
            throw InvalidArgument("sample set '" + a.model_id() + "' repeats noise id " +
                                  std::to_string(a.noise_ids()[i]) + "; pair on labels instead");
        }
        if (auto it = index.find(key); it != index.end()) pairs.push_back({i, it->second});
    }
    if (pairs.empty()) {
        throw InvalidArgument("sample sets '" + a.model_id() + "' and '" + b.model_id() + "' share no noise ids");
    }
    return pairs;
}

std::vector<std::vector<double>> describe_all(const SampleSet& set, const SimilarityBackend& backend,
                                              std::size_t threads) {
    std::vector<std::vector<double>> out(set.size());
    parallel_for(set.size(), threads, [&](std::size_t i) { out[i] = backend.describe(set.images()[i], set.key(i)); });
    return out;
}

double paired_fraction(const SampleSet& a, const SampleSet& b, const SimilarityBackend& backend, bool with_labels,
                       std::size_t threads) {
    const auto pairs = match_pairs(a, b, with_labels);
    std::vector<char> hit(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        const auto& p = pairs[k];
        hit[k] = similarity(backend, a.images()[p.a], b.images()[p.b], a.key(p.a), b.key(p.b)) > backend.threshold;
    });
    return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(pairs.size());
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::vector<std::string> ids, std::size_t dim, std::vector<float> rows)
    : ids_(std::move(ids)), dim_(dim), rows_(std::move(rows)) {
    if (dim_ == 0) throw InvalidArgument("embedding table needs a positive dimension");
    if (rows_.size() != ids_.size() * dim_) throw InvalidArgument("embedding table row count does not match ids");
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second) throw InvalidArgument("duplicate embedding id '" + ids_[i] + "'");
    }
}

EmbeddingTable EmbeddingTable::load(const fs::path& table, const fs::path& ids_path) {
    const Tensor t = read_tensor(table);
    if (t.dims.size() != 2) throw FormatError(table.string() + ": embedding table must be 2-d (N, D)");
    std::ifstream in(ids_path);
    if (!in) throw IoError("cannot open " + ids_path.string());
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    if (ids.size() != t.dims[0]) {
        throw FormatError(ids_path.string() + ": " + std::to_string(ids.size()) + " ids for " +
                          std::to_string(t.dims[0]) + " embedding rows");
    }
    return EmbeddingTable(std::move(ids), t.dims[1], t.values);
}

bool EmbeddingTable::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

std::span<const float> EmbeddingTable::row(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) throw InvalidArgument("no external embedding for id '" + std::string(id) + "'");
    return {rows_.data() + it->second * dim_, dim_};
}

std::string_view to_string(BackendKind kind) noexcept {
    switch (kind) {
        case BackendKind::PixelCosine: return "pixel_cosine";
        case BackendKind::PatchDescriptor: return "patch_descriptor";
        case BackendKind::ExternalEmbedding: return "external_embedding";
    }
    return "?";
}

BackendKind parse_backend_kind(std::string_view text) {
    const std::string s = lowercase(text);
    if (s == "pixel_cosine") return BackendKind::PixelCosine;
    if (s == "patch_descriptor") return BackendKind::PatchDescriptor;
    if (s == "external_embedding") return BackendKind::ExternalEmbedding;
    throw InvalidArgument("unknown similarity backend '" + std::string(text) +
                          "' (expected pixel_cosine, patch_descriptor or external_embedding)");
}

double default_threshold(BackendKind kind) noexcept { return kind == BackendKind::ExternalEmbedding ? 0.6 : 0.99; }

SimilarityBackend SimilarityBackend::pixel_cosine(double threshold) {
    SimilarityBackend b;
    b.kind = BackendKind::PixelCosine;
    b.threshold = threshold;
    return b;
}

SimilarityBackend SimilarityBackend::patch_descriptor(std::size_t patch, std::size_t stride, double threshold) {
    if (patch == 0 || stride == 0) throw InvalidArgument("patch size and stride must be positive");
    SimilarityBackend b;
    b.kind = BackendKind::PatchDescriptor;
    b.patch_size = patch;
    b.patch_stride = stride;
    b.threshold = threshold;
    return b;
}

SimilarityBackend SimilarityBackend::external(std::shared_ptr<const EmbeddingTable> table, double threshold) {
    if (!table) throw InvalidArgument("external embedding backend needs a table");
    SimilarityBackend b;
    b.kind = BackendKind::ExternalEmbedding;
    b.threshold = threshold;
    b.embeddings = std::move(table);
    return b;
}

std::vector<double> SimilarityBackend::describe(const Image& image, std::string_view id) const {
    std::vector<double> out;
    switch (kind) {
        case BackendKind::PixelCosine: {
            out.assign(image.data().begin(), image.data().end());
            double mean = 0.0;
            for (double v : out) mean += v;
            mean /= static_cast<double>(out.size());
            for (double& v : out) v -= mean;
            normalize_or_throw(out, "pixel_cosine");
            break;
        }
        case BackendKind::PatchDescriptor: {
            const Shape& s = image.shape();
            const std::size_t ph = std::min(patch_size, s.height);
            const std::size_t pw = std::min(patch_size, s.width);
            const auto rows = patch_origins(s.height, ph, patch_stride);
            const auto cols = patch_origins(s.width, pw, patch_stride);
            const double area = static_cast<double>(ph * pw);
            out.reserve(rows.size() * cols.size() * s.channels * 3);
            for (std::size_t r0 : rows) {
                for (std::size_t c0 : cols) {
                    for (std::size_t ch = 0; ch < s.channels; ++ch) {
                        double sum = 0.0, sum2 = 0.0, grad = 0.0;
                        for (std::size_t r = r0; r < r0 + ph; ++r) {
                            for (std::size_t c = c0; c < c0 + pw; ++c) {
                                const double v = image.at(r, c, ch);
                                sum += v;
                                sum2 += v * v;
                                if (c + 1 < c0 + pw) {
                                    const double dx = image.at(r, c + 1, ch) - v;
                                    grad += dx * dx;
                                }
                                if (r + 1 < r0 + ph) {
                                    const double dy = image.at(r + 1, c, ch) - v;
                                    grad += dy * dy;
                                }
                            }
                        }
                        const double mean = sum / area;
                        out.push_back(mean);
                        out.push_back(std::max(0.0, sum2 / area - mean * mean));
                        out.push_back(grad / area);
                    }
                }
            }
            normalize_or_throw(out, "patch_descriptor");
            break;
        }
        case BackendKind::ExternalEmbedding: {
            if (!embeddings) throw InvalidArgument("external embedding backend has no table");
            const auto row = embeddings->row(id);
            out.assign(row.begin(), row.end());
            normalize_or_throw(out, "external_embedding");
            break;
        }
    }
    return out;
}

double similarity(const SimilarityBackend& backend, const Image& a, const Image& b, std::string_view id_a,
                  std::string_view id_b) {
    require_same_shape(a.shape(), b.shape(), "similarity");
    return cosine(backend.describe(a, id_a), backend.describe(b, id_b));
}

double pixel_mae(const Image& a, const Image& b) {
    require_same_shape(a.shape(), b.shape(), "pixel_mae");
    double total = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        total += std::abs(static_cast<int>(to_pixel(a[j])) - static_cast<int>(to_pixel(b[j])));
    }
    return total / static_cast<double>(a.size());
}

SampleSet::SampleSet(std::string model_id, std::vector<Image> images, std::vector<std::int64_t> noise_ids,
                     std::optional<std::vector<int>> labels)
    : model_id_(std::move(model_id)),
      images_(std::move(images)),
      noise_ids_(std::move(noise_ids)),
      labels_(std::move(labels)) {
    if (model_id_.empty() || model_id_.find_first_of(",\n\r") != std::string::npos) {
        throw InvalidArgument("model id must be non-empty and free of commas and newlines");
    }
    if (noise_ids_.size() != images_.size()) {
        throw InvalidArgument("sample set '" + model_id_ + "': " + std::to_string(noise_ids_.size()) +
                              " noise ids for " + std::to_string(images_.size()) + " images");
    }
    if (labels_ && labels_->size() != images_.size()) {
        throw InvalidArgument("sample set '" + model_id_ + "': label count does not match image count");
    }
    for (std::size_t i = 1; i < images_.size(); ++i) {
        require_same_shape(images_.front().shape(), images_[i].shape(), "sample set");
    }
    std::set<std::pair<std::int64_t, int>> keys;
    for (std::size_t i = 0; i < images_.size(); ++i) {
        const int label = labels_ ? (*labels_)[i] : 0;
        if (!keys.insert({noise_ids_[i], label}).second) {
            throw InvalidArgument("sample set '" + model_id_ + "': duplicate noise id " +
                                  std::to_string(noise_ids_[i]));
        }
    }
}

std::string SampleSet::key(std::size_t i) const {
    std::string k = model_id_ + ":" + std::to_string(noise_ids_[i]);
    if (labels_) k += ":" + std::to_string((*labels_)[i]);
    return k;
}

void SampleSet::save(const fs::path& dir) const {
    fs::create_directories(dir);
    write_tensor(dir / "samples.drtf", images_to_tensor(images_));
    std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "manifest.txt").string());
    out << "model_id=" << model_id_ << '\n';
    for (std::size_t i = 0; i < size(); ++i) {
        out << noise_ids_[i];
        if (labels_) out << ',' << (*labels_)[i];
        out << '\n';
    }
}

SampleSet SampleSet::load(const fs::path& dir) {
    const fs::path manifest = dir / "manifest.txt";
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open sample manifest " + manifest.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("model_id=", 0) != 0) {
        throw FormatError(manifest.string() + ": first line must be model_id=<id>");
    }
    std::string model_id = line.substr(9);
    std::vector<std::int64_t> noise_ids;
    std::vector<int> labels;
    bool labelled = false;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto comma = line.find(',');
            noise_ids.push_back(std::stoll(line.substr(0, comma)));
            if (comma != std::string::npos) {
                labels.push_back(std::stoi(line.substr(comma + 1)));
                labelled = true;
            }
        } catch (const std::exception&) {
            throw FormatError(manifest.string() + ":" + std::to_string(lineno) + ": bad entry '" + line + "'");
        }
    }
    if (labelled && labels.size() != noise_ids.size()) {
        throw FormatError(manifest.string() + ": labels must be given for every sample or none");
    }
    auto images = tensor_to_images(read_tensor(dir / "samples.drtf"));
    std::optional<std::vector<int>> opt_labels;
    if (labelled) opt_labels = std::move(labels);
    return SampleSet(std::move(model_id), std::move(images), std::move(noise_ids), std::move(opt_labels));
}

std::string train_key(const Dataset& train, std::size_t i) {
    return "train:" + std::to_string(train.source_ids()[i]);
}

double rp_score(const SampleSet& a, const SampleSet& b, const SimilarityBackend& backend, std::size_t threads) {
    return paired_fraction(a, b, backend, false, threads);
}

double rp_cond(const SampleSet& a, const SampleSet& b, const SimilarityBackend& backend, std::size_t threads) {
    return paired_fraction(a, b, backend, true, threads);
}

double mae_score(const SampleSet& a, const SampleSet& b, double threshold, std::size_t threads) {
    const auto pairs = match_pairs(a, b, false);
    std::vector<char> hit(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        hit[k] = pixel_mae(a.images()[pairs[k].a], b.images()[pairs[k].b]) < threshold;
    });
    return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(pairs.size());
}

double gl_score(const SampleSet& samples, const Dataset& train, const SimilarityBackend& backend,
                std::size_t threads) {
    if (samples.size() == 0) throw InvalidArgument("gl_score: empty sample set");
    require_same_shape(train.shape(), samples.images().front().shape(), "gl_score");
    std::vector<std::vector<double>> train_desc(train.size());
    parallel_for(train.size(), threads,
                 [&](std::size_t i) { train_desc[i] = backend.describe(train[i], train_key(train, i)); });
    const auto sample_desc = describe_all(samples, backend, threads);
    std::vector<char> copied(samples.size());
    parallel_for(samples.size(), threads, [&](std::size_t k) {
        double best = -1.0;
        for (const auto& t : train_desc) best = std::max(best, cosine(sample_desc[k], t));
        copied[k] = best > backend.threshold;
    });
    return 1.0 - static_cast<double>(std::count(copied.begin(), copied.end(), 1)) /
                     static_cast<double>(samples.size());
}

double rp_between(const SampleSet& unconditional, const SampleSet& conditional, const SimilarityBackend& backend,
                  std::size_t threads) {
    if (!conditional.labels()) {
        throw InvalidArgument("rp_between needs class labels on the conditional set '" + conditional.model_id() + "'");
    }
    std::map<std::int64_t, std::vector<std::size_t>> by_noise;
    for (std::size_t j = 0; j < conditional.size(); ++j) by_noise[conditional.noise_ids()[j]].push_back(j);
    std::vector<std::pair<std::size_t, const std::vector<std::size_t>*>> matched;
    for (std::size_t i = 0; i < unconditional.size(); ++i) {
        if (auto it = by_noise.find(unconditional.noise_ids()[i]); it != by_noise.end()) {
            matched.emplace_back(i, &it->second);
        }
    }
    if (matched.empty()) {
        throw InvalidArgument("sample sets '" + unconditional.model_id() + "' and '" + conditional.model_id() +
                              "' share no noise ids");
    }
    std::vector<char> hit(matched.size());
    parallel_for(matched.size(), threads, [&](std::size_t k) {
        const auto [i, candidates] = matched[k];
        const auto u = backend.describe(unconditional.images()[i], unconditional.key(i));
        double best = -1.0;
        for (std::size_t j : *candidates) {
            best = std::max(best, cosine(u, backend.describe(conditional.images()[j], conditional.key(j))));
        }
        hit[k] = best > backend.threshold;
    });
    return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(matched.size());
}

std::pair<std::size_t, double> nearest_train_mae(const Image& x, const Dataset& train) {
    std::size_t best = 0;
    double best_mae = pixel_mae(x, train[0]);
    for (std::size_t i = 1; i < train.size(); ++i) {
        const double m = pixel_mae(x, train[i]);
        if (m < best_mae) {
            best_mae = m;
            best = i;
        }
    }
    return {best, best_mae};
}

std::string_view to_string(PairMetric metric) noexcept { return metric == PairMetric::RP ? "rp" : "mae"; }

PairMetric parse_pair_metric(std::string_view text) {
    const std::string s = lowercase(text);
    if (s == "rp") return PairMetric::RP;
    if (s == "mae") return PairMetric::MAE;
    throw InvalidArgument("unknown score metric '" + std::string(text) + "' (expected rp or mae)");
}

std::string ScoreMatrix::to_csv() const {
    std::string out = "model";
    for (const auto& id : model_ids) out += "," + id;
    out += '\n';
    char buf[32];
    for (std::size_t i = 0; i < size(); ++i) {
        out += model_ids[i];
        for (std::size_t j = 0; j < size(); ++j) {
            std::snprintf(buf, sizeof(buf), ",%.6f", at(i, j));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

ScoreMatrix score_matrix(const std::vector<SampleSet>& sets, const SimilarityBackend& backend, PairMetric metric,
                         double mae_threshold, std::size_t threads) {
    if (sets.empty()) throw InvalidArgument("score_matrix needs at least one sample set");
    ScoreMatrix m;
    const std::size_t n = sets.size();
    for (const auto& s : sets) m.model_ids.push_back(s.model_id());
    m.entries.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = metric == PairMetric::RP ? rp_score(sets[i], sets[j], backend, threads)
                                                      : mae_score(sets[i], sets[j], mae_threshold, threads);
            m.entries[i * n + j] = v;
            m.entries[j * n + i] = v;
        }
    }
    return m;
}

}  // namespace reprodiff

// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "reprodiff/error.hpp"
#include "reprodiff/parallel.hpp"

namespace reprodiff {

namespace {

std::string format_row(double a, double b, int cls, double sim) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%d,%.6f\n", a, b, cls, sim);
    return buf;
}

double axis_value(double lo, double hi, std::size_t i, std::size_t n) {
    if (n == 1) return lo;
    return lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n - 1));
}

}  // namespace

double HyperplaneGrid::alpha(std::size_t i) const noexcept { return axis_value(alpha_lo, alpha_hi, i, resolution); }
double HyperplaneGrid::beta(std::size_t j) const noexcept { return axis_value(beta_lo, beta_hi, j, resolution); }

std::string HyperplaneMap::cells_csv() const {
    std::string out = "alpha,beta,class,similarity\n";
    for (const auto& c : cells) out += format_row(c.alpha, c.beta, c.anchor, c.similarity);
    return out;
}

std::string HyperplaneMap::corners_csv() const {
    std::string out = "alpha,beta,class,similarity\n";
    for (const auto& c : corners) out += format_row(c.alpha, c.beta, c.anchor, c.similarity);
    return out;
}

std::vector<std::uint8_t> HyperplaneMap::render() const {
    std::vector<std::uint8_t> pixels(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const double sim = std::clamp(cells[k].similarity, 0.0, 1.0);
        pixels[k] = static_cast<std::uint8_t>(85 * (cells[k].anchor - 1) + static_cast<int>(std::lround(84.0 * sim)));
    }
    return pixels;
}

Image hyperplane_noise(const Image& eps1, const Image& eps2, const Image& eps3, double alpha, double beta) {
    require_same_shape(eps1.shape(), eps2.shape(), "hyperplane anchors");
    require_same_shape(eps1.shape(), eps3.shape(), "hyperplane anchors");
    const double w1 = 1.0 - alpha - beta;
    Image out(eps1.shape());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = w1 * eps1[j] + alpha * eps2[j] + beta * eps3[j];
    return out;
}

HyperplaneCell classify_against_anchors(const std::array<std::vector<double>, 3>& anchor_desc,
                                        const std::vector<double>& desc, double alpha, double beta) {
    HyperplaneCell cell{alpha, beta, 1, std::clamp(dot(anchor_desc[0], desc), -1.0, 1.0)};
    for (int k = 1; k < 3; ++k) {
        const double sim = std::clamp(dot(anchor_desc[k], desc), -1.0, 1.0);
        if (sim > cell.similarity) {
            cell.similarity = sim;
            cell.anchor = k + 1;
        }
    }
    return cell;
}

HyperplaneMap hyperplane_map(const DenoisingModel& model, const SamplerConfig& sampler, const Image& eps1,
                             const Image& eps2, const Image& eps3, const HyperplaneGrid& grid,
                             const SimilarityBackend& backend, std::size_t threads) {
    if (grid.resolution < 1) throw InvalidArgument("hyperplane grid needs at least one point per axis");
    if (eps1 == eps2 || eps1 == eps3 || eps2 == eps3) throw InvalidArgument("hyperplane anchor noises must be distinct");

    HyperplaneMap map;
    map.grid = grid;
    map.anchor_noises = {eps1, eps2, eps3};
    std::array<std::vector<double>, 3> anchor_desc;
    for (std::size_t k = 0; k < 3; ++k) {
        map.anchor_images[k] = generate(model, map.anchor_noises[k], sampler);
        anchor_desc[k] = backend.describe(map.anchor_images[k], "anchor:" + std::to_string(k + 1));
    }

    const auto evaluate = [&](double alpha, double beta, const std::string& id) {
        const Image x = generate(model, hyperplane_noise(eps1, eps2, eps3, alpha, beta), sampler);
        return classify_against_anchors(anchor_desc, backend.describe(x, id), alpha, beta);
    };

    const std::size_t g = grid.resolution;
    map.cells.resize(g * g);
    parallel_for(g * g, threads, [&](std::size_t idx) {
        const std::size_t i = idx / g;
        const std::size_t j = idx % g;
        map.cells[idx] = evaluate(grid.alpha(j), grid.beta(i), "cell:" + std::to_string(idx));
    });
    const std::array<std::pair<double, double>, 3> corner_points{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
    for (std::size_t k = 0; k < 3; ++k) {
        map.corners[k] = evaluate(corner_points[k].first, corner_points[k].second, "corner:" + std::to_string(k + 1));
    }
    return map;
}

double adjacent_coherence(const HyperplaneMap& map, double tolerance) {
    const std::size_t g = map.grid.resolution;
    std::size_t pairs = 0, coherent = 0;
    const auto consider = [&](const HyperplaneCell& a, const HyperplaneCell& b) {
        ++pairs;
        if (a.anchor == b.anchor || std::abs(a.similarity - b.similarity) < tolerance) ++coherent;
    };
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            if (j + 1 < g) consider(map.cell(i, j), map.cell(i, j + 1));
            if (i + 1 < g) consider(map.cell(i, j), map.cell(i + 1, j));
        }
    }
    return pairs == 0 ? 1.0 : static_cast<double>(coherent) / static_cast<double>(pairs);
}

double lipschitz_probe(const DenoisingModel& model, const SamplerConfig& sampler, const Image& center, double radius,
                       std::size_t n, SeededRng rng, std::size_t threads) {
    if (!(radius > 0.0)) throw InvalidArgument("lipschitz_probe radius must be positive");
    if (n < 2) throw InvalidArgument("lipschitz_probe needs at least two points");
    const double d = static_cast<double>(center.size());
    std::vector<Image> points;
    points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Image dir = sample_standard_normal(rng, center.shape());
        const double norm = norm2(dir.values());
        const double r = radius * std::pow(rng.next_uniform(), 1.0 / d);
        for (std::size_t j = 0; j < dir.size(); ++j) dir[j] = center[j] + r * dir[j] / norm;
        points.push_back(std::move(dir));
    }
    const std::vector<Image> images = generate_batch(model, points, sampler, threads);
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double num = std::sqrt(squared_distance(images[a].values(), images[b].values()));
            const double den = std::sqrt(squared_distance(points[a].values(), points[b].values()));
            if (den > 0.0) worst = std::max(worst, num / den);
        }
    }
    return worst;
}

std::string SweepResult::to_csv() const {
    std::string out = "dataset_size,rp_score,gl_score,mae_mean,mae_max,mae_below_one\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.dataset_size, r.rp_score, r.gl_score,
                      r.mae_mean, r.mae_max, r.mae_below_one);
        out += buf;
    }
    return out;
}

std::vector<Image> seeded_noises(const Schedule& schedule, Shape shape, std::uint64_t seed, std::int64_t first,
                                 std::size_t count) {
    std::vector<Image> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        SeededRng rng(seed, static_cast<std::uint64_t>(first + static_cast<std::int64_t>(k)));
        out.push_back(scale_initial_noise(schedule, sample_standard_normal(rng, shape)));
    }
    return out;
}

SweepResult memorization_sweep(const Dataset& base, const Schedule& schedule, const std::vector<std::size_t>& sizes,
                               const std::vector<SamplerConfig>& samplers, std::size_t n_samples,
                               const SimilarityBackend& backend, std::uint64_t seed, std::size_t threads) {
    if (sizes.empty()) throw InvalidArgument("memorization_sweep needs at least one dataset size");
    if (samplers.size() < 2) throw InvalidArgument("memorization_sweep needs at least two sampler configs for RP");
    if (n_samples == 0) throw InvalidArgument("memorization_sweep needs at least one sample");
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (sizes[k] < 1 || sizes[k] > base.size()) {
            throw InvalidArgument("sweep size " + std::to_string(sizes[k]) + " outside [1, " +
                                  std::to_string(base.size()) + "]");
        }
        if (k > 0 && sizes[k] <= sizes[k - 1]) throw InvalidArgument("sweep sizes must be strictly increasing");
    }

    const auto noises = seeded_noises(schedule, base.shape(), seed, 0, n_samples);
    std::vector<std::int64_t> ids(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) ids[k] = static_cast<std::int64_t>(k);

    SweepResult result;
    for (std::size_t size : sizes) {
        const Dataset subset = base.subset(size, seed);
        const OptimalDenoiser model(subset, schedule);
        std::vector<SampleSet> sets;
        for (const auto& cfg : samplers) {
            sets.emplace_back(cfg.label(), generate_batch(model, noises, cfg, threads), ids);
        }
        SweepRow row;
        row.dataset_size = size;
        row.rp_score = 1.0;
        for (std::size_t a = 0; a < sets.size(); ++a) {
            for (std::size_t b = a + 1; b < sets.size(); ++b) {
                row.rp_score = std::min(row.rp_score, rp_score(sets[a], sets[b], backend, threads));
            }
        }
        for (const auto& set : sets) row.gl_score = std::max(row.gl_score, gl_score(set, subset, backend, threads));

        std::vector<double> maes;
        for (const auto& set : sets) {
            const std::size_t offset = maes.size();
            maes.resize(offset + set.size());
            parallel_for(set.size(), threads,
                         [&](std::size_t k) { maes[offset + k] = nearest_train_mae(set.images()[k], subset).second; });
        }
        double total = 0.0;
        std::size_t below = 0;
        for (double m : maes) {
            total += m;
            row.mae_max = std::max(row.mae_max, m);
            if (m < 1.0) ++below;
        }
        row.mae_mean = total / static_cast<double>(maes.size());
        row.mae_below_one = static_cast<double>(below) / static_cast<double>(maes.size());
        result.rows.push_back(row);
    }
    return result;
}

}  // namespace reprodiff

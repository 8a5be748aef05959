// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "reprodiff/dataset.hpp"
#include "reprodiff/denoiser.hpp"
#include "reprodiff/experiments.hpp"
#include "reprodiff/image_io.hpp"
#include "reprodiff/inverse.hpp"
#include "reprodiff/metrics.hpp"
#include "reprodiff/sampler.hpp"
#include "reprodiff/schedule.hpp"
#include "reprodiff/tensor_file.hpp"

namespace reprodiff::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void prepare_output(const Invocation& inv) {
    if (inv.out_dir.empty()) throw ConfigError("an output directory is required (--out)");
    std::error_code ec;
    fs::create_directories(inv.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + inv.out_dir.string() + ": " + ec.message());
    write_text(inv.out_dir / "config.txt", inv.config.resolved());
}

// Wraps library argument errors raised while interpreting a config value so
// the message names the key.
template <class Fn>
auto with_key(std::string_view key, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError("config key '" + std::string(key) + "': " + e.what());
    }
}

Schedule make_schedule(const RunConfig& cfg) {
    ScheduleParams p;
    p.kind = with_key("schedule.kind", [&] { return parse_schedule_kind(cfg.get_string("schedule.kind")); });
    p.beta_min = cfg.get_double("schedule.beta_min");
    p.beta_max = cfg.get_double("schedule.beta_max");
    p.sigma_min = cfg.get_double("schedule.sigma_min");
    p.sigma_max = cfg.get_double("schedule.sigma_max");
    p.t_min = cfg.get_double("schedule.t_min");
    p.t_max = cfg.get_double("schedule.t_max");
    return Schedule(p);
}

Dataset load_train(const RunConfig& cfg) {
    const std::string path = cfg.require_string("dataset.path");
    LoadOptions opts;
    if (cfg.has("dataset.limit")) opts.limit = static_cast<std::size_t>(cfg.get_count("dataset.limit"));
    opts.shuffle_seed = cfg.get_optional_uint("dataset.shuffle_seed");
    return load_dataset(path, opts);
}

SamplerConfig make_sampler(const RunConfig& cfg, Direction direction) {
    SamplerConfig sc;
    with_key("sampler.method", [&] {
        parse_method(cfg.get_string("sampler.method"), sc);
        return 0;
    });
    sc.steps = cfg.get_count("sampler.steps");
    sc.grid = with_key("sampler.grid", [&] { return parse_time_grid(cfg.get_string("sampler.grid")); });
    sc.t_start = cfg.get_optional_double("sampler.t_start");
    sc.t_end = cfg.get_optional_double("sampler.t_end");
    sc.denoise_final = cfg.get_bool("sampler.denoise_final");
    const std::string dir = cfg.get_string("sampler.direction");
    if (dir != "auto") {
        const Direction wanted = with_key("sampler.direction", [&] { return parse_direction(dir); });
        if (wanted != direction) {
            throw ConfigError("config key 'sampler.direction' is '" + dir + "' but this command runs in the " +
                              std::string(to_string(direction)) + " direction");
        }
    }
    return sc;
}

SimilarityBackend make_backend(const RunConfig& cfg) {
    const BackendKind kind = with_key("metrics.backend", [&] { return parse_backend_kind(cfg.get_string("metrics.backend")); });
    const double threshold = cfg.get_optional_double("metrics.threshold").value_or(default_threshold(kind));
    switch (kind) {
        case BackendKind::PixelCosine: return SimilarityBackend::pixel_cosine(threshold);
        case BackendKind::PatchDescriptor:
            return SimilarityBackend::patch_descriptor(cfg.get_count("metrics.patch_size"),
                                                       cfg.get_count("metrics.patch_stride"), threshold);
        case BackendKind::ExternalEmbedding: {
            auto table = std::make_shared<const EmbeddingTable>(EmbeddingTable::load(
                cfg.require_string("metrics.embedding_table"), cfg.require_string("metrics.embedding_ids")));
            return SimilarityBackend::external(std::move(table), threshold);
        }
    }
    throw ConfigError("config key 'metrics.backend': unsupported backend");
}

std::vector<Image> read_inputs(const std::vector<fs::path>& inputs) {
    std::vector<Image> out;
    for (const auto& path : inputs) {
        if (fs::is_directory(path)) {
            const Dataset ds = load_dataset(path);
            out.insert(out.end(), ds.images().begin(), ds.images().end());
        } else if (is_image_file(path)) {
            out.push_back(read_image(path));
        } else {
            auto images = tensor_to_images(read_tensor(path));
            out.insert(out.end(), images.begin(), images.end());
        }
    }
    if (out.empty()) throw ConfigError("no input images given");
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string sample_model_id(const RunConfig& cfg, const SamplerConfig& sc) {
    return cfg.has("sampler.model_id") ? cfg.get_string("sampler.model_id") : sc.label();
}

}  // namespace

void cmd_make_dataset(const Invocation& inv) {
    const auto& cfg = inv.config;
    const Shape shape{cfg.get_count("dataset.synthetic_height"), cfg.get_count("dataset.synthetic_width"),
                      cfg.get_count("dataset.synthetic_channels")};
    if (shape.channels != 1 && shape.channels != 3) {
        throw ConfigError("config key 'dataset.synthetic_channels': expected 1 or 3");
    }
    const auto count = cfg.get_count("dataset.synthetic_count");
    const auto classes = static_cast<std::size_t>(cfg.get_uint("dataset.synthetic_classes"));
    prepare_output(inv);
    save_dataset_images(make_synthetic_dataset(cfg.get_uint("seed"), count, shape, classes), inv.out_dir);
}

void cmd_sample(const Invocation& inv) {
    const auto& cfg = inv.config;
    const Schedule schedule = make_schedule(cfg);
    const SamplerConfig sc = make_sampler(cfg, Direction::Generate);
    const auto first = cfg.get_int("sample.first_noise_id");
    const std::string model_id = sample_model_id(cfg, sc);
    const bool grid = cfg.get_bool("sample.png_grid");
    const OptimalDenoiser den(load_train(cfg), schedule);
    const Shape shape = den.dataset().shape();

    std::vector<Image> noises;
    if (cfg.has("sample.noise_path")) {
        noises = tensor_to_images(read_tensor(cfg.get_string("sample.noise_path")));
        if (noises.empty()) throw ConfigError("config key 'sample.noise_path': file holds no images");
        if (!(noises.front().shape() == shape)) {
            throw ConfigError("config key 'sample.noise_path': noise shape " + noises.front().shape().to_string() +
                              " does not match dataset shape " + shape.to_string());
        }
    } else {
        noises = seeded_noises(schedule, shape, cfg.get_uint("seed"), first, cfg.get_count("sample.count"));
    }
    prepare_output(inv);

    std::vector<std::int64_t> ids(noises.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = first + static_cast<std::int64_t>(i);
    std::vector<Image> images = generate_batch(den, noises, sc, inv.threads);
    if (grid) {
        const std::size_t shown = std::min<std::size_t>(images.size(), 64);
        const std::vector<Image> head(images.begin(), images.begin() + static_cast<std::ptrdiff_t>(shown));
        const auto columns = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(shown))));
        write_image(inv.out_dir / "grid.png", tile_images(head, columns));
    }
    SampleSet(model_id, std::move(images), std::move(ids)).save(inv.out_dir);
}

void cmd_encode(const Invocation& inv) {
    const auto& cfg = inv.config;
    const Schedule schedule = make_schedule(cfg);
    const SamplerConfig sc = make_sampler(cfg, Direction::Encode);
    const std::vector<Image> inputs = read_inputs(inv.inputs);
    const OptimalDenoiser den(load_train(cfg), schedule);
    prepare_output(inv);
    write_tensor(inv.out_dir / "codes.drtf", images_to_tensor(encode_batch(den, inputs, sc, inv.threads)));
}

void cmd_scores(const Invocation& inv) {
    const auto& cfg = inv.config;
    if (inv.inputs.empty()) throw ConfigError("scores needs at least one sample-set directory");
    const SimilarityBackend backend = make_backend(cfg);
    const PairMetric metric = with_key("metrics.metric", [&] { return parse_pair_metric(cfg.get_string("metrics.metric")); });
    const double mae_threshold = cfg.get_double("metrics.mae_threshold");
    std::vector<SampleSet> sets;
    for (const auto& path : inv.inputs) sets.push_back(SampleSet::load(path));
    std::optional<Dataset> train;
    if (cfg.has("dataset.path")) train = load_train(cfg);

    const ScoreMatrix matrix = score_matrix(sets, backend, metric, mae_threshold, inv.threads);
    std::string gl;
    if (train) {
        gl = "model,gl_score\n";
        for (const auto& set : sets) gl += set.model_id() + "," + format_double(gl_score(set, *train, backend, inv.threads)) + "\n";
    }
    prepare_output(inv);
    write_text(inv.out_dir / "scores.csv", matrix.to_csv());
    if (train) write_text(inv.out_dir / "gl.csv", gl);
}

void cmd_hyperplane(const Invocation& inv) {
    const auto& cfg = inv.config;
    const Schedule schedule = make_schedule(cfg);
    const SamplerConfig sc = make_sampler(cfg, Direction::Generate);
    const SimilarityBackend backend = make_backend(cfg);
    HyperplaneGrid grid;
    grid.resolution = cfg.get_count("experiment.grid");
    grid.alpha_lo = cfg.get_double("experiment.alpha_lo");
    grid.alpha_hi = cfg.get_double("experiment.alpha_hi");
    grid.beta_lo = cfg.get_double("experiment.beta_lo");
    grid.beta_hi = cfg.get_double("experiment.beta_hi");
    const auto ids = cfg.get_int_list("experiment.anchor_noise_ids");
    if (ids.size() != 3) throw ConfigError("config key 'experiment.anchor_noise_ids': expected three noise ids");
    const OptimalDenoiser den(load_train(cfg), schedule);
    const Shape shape = den.dataset().shape();
    const std::uint64_t seed = cfg.get_uint("seed");
    std::array<Image, 3> eps;
    for (std::size_t k = 0; k < 3; ++k) eps[k] = seeded_noises(schedule, shape, seed, ids[k], 1).front();

    const HyperplaneMap map = hyperplane_map(den, sc, eps[0], eps[1], eps[2], grid, backend, inv.threads);
    prepare_output(inv);
    write_text(inv.out_dir / "hyperplane.csv", map.cells_csv());
    write_text(inv.out_dir / "corners.csv", map.corners_csv());
    write_raster(inv.out_dir / "hyperplane.pgm", PixelRaster{Shape{grid.resolution, grid.resolution, 1}, map.render()});
    write_tensor(inv.out_dir / "anchors.drtf",
                 images_to_tensor({map.anchor_images[0], map.anchor_images[1], map.anchor_images[2]}));
}

void cmd_sweep(const Invocation& inv) {
    const auto& cfg = inv.config;
    const Schedule schedule = make_schedule(cfg);
    const SimilarityBackend backend = make_backend(cfg);
    const auto sizes = cfg.get_count_list("experiment.sizes");
    std::vector<SamplerConfig> samplers;
    for (const auto& item : cfg.get_list("experiment.samplers")) {
        samplers.push_back(with_key("experiment.samplers", [&] { return parse_sampler_spec(item); }));
    }
    const auto samples = cfg.get_count("experiment.samples");
    const Dataset base = load_train(cfg);
    const SweepResult result =
        memorization_sweep(base, schedule, sizes, samplers, samples, backend, cfg.get_uint("seed"), inv.threads);
    prepare_output(inv);
    write_text(inv.out_dir / "sweep.csv", result.to_csv());
}

void cmd_inpaint(const Invocation& inv) {
    const auto& cfg = inv.config;
    const Schedule schedule = make_schedule(cfg);
    DpsConfig dps;
    dps.n_dps = cfg.get_count("inverse.n_dps");
    dps.xi = cfg.get_double_list("inverse.xi");
    {
        SamplerConfig method;
        with_key("inverse.method", [&] {
            parse_method(cfg.get_string("inverse.method"), method);
            return 0;
        });
        dps.method = method.method;
        dps.order = method.order;
    }
    dps.eval_budget = cfg.get_count("inverse.budget");
    dps.grid = with_key("sampler.grid", [&] { return parse_time_grid(cfg.get_string("sampler.grid")); });
    (void)dps.substeps();
    const double eta = cfg.get_double("inverse.eta");
    const auto first_target = static_cast<std::size_t>(cfg.get_uint("inverse.target_index"));
    const auto count = cfg.get_count("inverse.count");
    const auto first_noise = cfg.get_int("sample.first_noise_id");
    const std::uint64_t seed = cfg.get_uint("seed");

    const OptimalDenoiser den(load_train(cfg), schedule);
    const Dataset& train = den.dataset();
    const Shape shape = train.shape();
    if (first_target + count > train.size()) {
        throw ConfigError("config keys 'inverse.target_index' and 'inverse.count' select images past the end of the " +
                          std::to_string(train.size()) + "-image dataset");
    }
    const std::string mask_spec = cfg.get_string("inverse.mask");
    const InpaintMask mask = with_key("inverse.mask", [&] {
        if (mask_spec == "easy" || mask_spec == "hard") return InpaintMask::preset(mask_spec, shape.height, shape.width);
        return InpaintMask::load_pgm(mask_spec);
    });

    std::vector<Observation> observations;
    std::vector<Image> noises;
    for (std::size_t i = 0; i < count; ++i) {
        const std::int64_t noise_id = first_noise + static_cast<std::int64_t>(i);
        const Image& u = train.images()[first_target + i];
        std::optional<SeededRng> rng;
        if (eta > 0.0) rng = SeededRng(seed, static_cast<std::uint64_t>(noise_id)).fork(1);
        observations.push_back(with_key("inverse.mask", [&] { return apply_mask(u, mask, eta, rng); }));
        noises.push_back(seeded_noises(schedule, shape, seed, noise_id, 1).front());
    }
    const std::vector<Image> recs = dps_inpaint_batch(den, observations, noises, dps, inv.threads);

    prepare_output(inv);
    mask.save_pgm(inv.out_dir / "mask.pgm");
    std::vector<Image> zs;
    for (const auto& o : observations) zs.push_back(o.z);
    write_tensor(inv.out_dir / "observations.drtf", images_to_tensor(zs));
    write_tensor(inv.out_dir / "reconstructions.drtf", images_to_tensor(recs));
    std::string csv = "target_index,noise_id,observed_mae,nearest_train,nearest_mae\n";
    for (std::size_t i = 0; i < count; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "observation_%04zu.png", i);
        write_image(inv.out_dir / name, zs[i]);
        std::snprintf(name, sizeof name, "reconstruction_%04zu.png", i);
        write_image(inv.out_dir / name, recs[i]);
        const auto [nearest, mae] = nearest_train_mae(recs[i], train);
        csv += std::to_string(first_target + i) + "," + std::to_string(first_noise + static_cast<std::int64_t>(i)) + "," +
               format_double(observed_mae(recs[i], train.images()[first_target + i], mask)) + "," +
               std::to_string(nearest) + "," + format_double(mae) + "\n";
    }
    write_text(inv.out_dir / "inpaint.csv", csv);
}

int run_guarded(const std::function<void(const Invocation&)>& command, const Invocation& inv, std::ostream& err) {
    try {
        command(inv);
        return kExitOk;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
}

}  // namespace reprodiff::cli

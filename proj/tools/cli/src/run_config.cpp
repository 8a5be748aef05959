// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "reprodiff_cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace reprodiff::cli {

const std::vector<KeyInfo>& known_keys() {
    static const std::vector<KeyInfo> keys = {
        {"seed", "0", "master seed for noises and subsets"},
        {"dataset.path", "", "image directory or TensorFile"},
        {"dataset.limit", "", "keep only the first N images"},
        {"dataset.shuffle_seed", "", "seeded subset before limiting"},
        {"dataset.synthetic_count", "64", "make-dataset: number of images"},
        {"dataset.synthetic_height", "8", "make-dataset: image height"},
        {"dataset.synthetic_width", "8", "make-dataset: image width"},
        {"dataset.synthetic_channels", "3", "make-dataset: channels (1 or 3)"},
        {"dataset.synthetic_classes", "0", "make-dataset: label count, 0 for none"},
        {"schedule.kind", "vp", "vp, ve or subvp"},
        {"schedule.beta_min", "0.1", ""},
        {"schedule.beta_max", "20", ""},
        {"schedule.sigma_min", "0.01", ""},
        {"schedule.sigma_max", "50", ""},
        {"schedule.t_min", "0.001", ""},
        {"schedule.t_max", "1", ""},
        {"sampler.method", "heun2", "euler, heun2, expint1, expint2 or expint3"},
        {"sampler.steps", "64", ""},
        {"sampler.grid", "uniform", "uniform or logsnr"},
        {"sampler.direction", "auto", "auto, generate or encode; must agree with the command"},
        {"sampler.t_start", "", "override of the integration start time"},
        {"sampler.t_end", "", "override of the integration end time"},
        {"sampler.denoise_final", "true", "return the posterior mean at t_end"},
        {"sampler.model_id", "", "sample set id; defaults to the sampler label"},
        {"sample.count", "10000", ""},
        {"sample.first_noise_id", "0", ""},
        {"sample.noise_path", "", "TensorFile of initial states instead of seeded noise"},
        {"sample.png_grid", "false", "also write grid.png"},
        {"metrics.backend", "pixel_cosine", "pixel_cosine, patch_descriptor or external_embedding"},
        {"metrics.threshold", "", "similarity threshold; backend default when unset"},
        {"metrics.metric", "rp", "rp or mae"},
        {"metrics.mae_threshold", "15", "pixel MAE threshold for the mae metric"},
        {"metrics.patch_size", "8", ""},
        {"metrics.patch_stride", "4", ""},
        {"metrics.embedding_table", "", "TensorFile of embeddings"},
        {"metrics.embedding_ids", "", "one id per embedding row"},
        {"experiment.grid", "100", "hyperplane points per axis"},
        {"experiment.alpha_lo", "-0.1", ""},
        {"experiment.alpha_hi", "1.1", ""},
        {"experiment.beta_lo", "-0.1", ""},
        {"experiment.beta_hi", "1.1", ""},
        {"experiment.anchor_noise_ids", "0,1,2", "three noise ids spanning the plane"},
        {"experiment.sizes", "64,128,256,512,1024,2048,4096,8192,16384,32768", "sweep dataset sizes"},
        {"experiment.samplers", "euler:512,heun2:64,expint3:32", "sweep samplers as method:steps"},
        {"experiment.samples", "1000", "sweep samples per size and sampler"},
        {"inverse.mask", "easy", "easy, hard or a PGM path"},
        {"inverse.n_dps", "34", ""},
        {"inverse.xi", "1", "one step size or one per posterior step"},
        {"inverse.method", "expint3", "solver for the inner update"},
        {"inverse.budget", "100", "denoiser evaluations spent by the solver"},
        {"inverse.target_index", "0", "first dataset image to reconstruct"},
        {"inverse.count", "1", "number of consecutive targets"},
        {"inverse.eta", "0", "observation noise level"},
    };
    return keys;
}

namespace {

const KeyInfo* find_key(std::string_view key) {
    const auto& keys = known_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeyInfo& k) { return k.name == key; });
    return it == keys.end() ? nullptr : &*it;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, const std::string& value, std::string_view expected) {
    throw ConfigError("config key '" + std::string(key) + "': expected " + std::string(expected) + ", got '" +
                      value + "'");
}

std::int64_t parse_int(std::string_view key, const std::string& v) {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
    return out;
}

std::uint64_t parse_uint(std::string_view key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a nonnegative integer");
    return out;
}

std::size_t parse_count(std::string_view key, const std::string& v) {
    const std::uint64_t n = parse_uint(key, v);
    if (n == 0) bad_value(key, v, "a positive count");
    return static_cast<std::size_t>(n);
}

double parse_double(std::string_view key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used == v.size() && std::isfinite(out)) return out;
    } catch (const std::exception&) {
    }
    bad_value(key, v, "a finite number");
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text, std::string_view origin) {
    RunConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        if (!find_key(key)) throw ConfigError(where + ": unknown config key '" + key + "'");
        if (cfg.values_.count(key)) throw ConfigError(where + ": config key '" + key + "' given twice");
        cfg.values_[key] = trim(std::string_view(stripped).substr(eq + 1));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

void RunConfig::set(std::string_view key, std::string value) {
    if (!find_key(key)) throw ConfigError("unknown config key '" + std::string(key) + "'");
    values_[std::string(key)] = std::move(value);
}

bool RunConfig::has(std::string_view key) const { return !raw(key).empty(); }

std::string RunConfig::raw(std::string_view key) const {
    const KeyInfo* info = find_key(key);
    if (!info) throw ConfigError("unknown config key '" + std::string(key) + "'");
    if (const auto it = values_.find(key); it != values_.end()) return it->second;
    return std::string(info->default_value);
}

std::string RunConfig::get_string(std::string_view key) const { return raw(key); }

std::string RunConfig::require_string(std::string_view key) const {
    std::string v = raw(key);
    if (v.empty()) throw ConfigError("missing required config key '" + std::string(key) + "'");
    return v;
}

std::int64_t RunConfig::get_int(std::string_view key) const { return parse_int(key, require_string(key)); }

std::uint64_t RunConfig::get_uint(std::string_view key) const { return parse_uint(key, require_string(key)); }

std::size_t RunConfig::get_count(std::string_view key) const { return parse_count(key, require_string(key)); }

double RunConfig::get_double(std::string_view key) const { return parse_double(key, require_string(key)); }

std::optional<double> RunConfig::get_optional_double(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return get_double(key);
}

std::optional<std::uint64_t> RunConfig::get_optional_uint(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return get_uint(key);
}

bool RunConfig::get_bool(std::string_view key) const {
    const std::string v = require_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "true or false");
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
    const std::string v = require_string(key);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = v.find(',', start);
        std::string item = trim(std::string_view(v).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (item.empty()) bad_value(key, v, "a comma-separated list without empty items");
        out.push_back(std::move(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::int64_t> RunConfig::get_int_list(std::string_view key) const {
    std::vector<std::int64_t> out;
    for (const auto& item : get_list(key)) out.push_back(parse_int(key, item));
    return out;
}

std::vector<std::size_t> RunConfig::get_count_list(std::string_view key) const {
    std::vector<std::size_t> out;
    for (const auto& item : get_list(key)) out.push_back(parse_count(key, item));
    return out;
}

std::vector<double> RunConfig::get_double_list(std::string_view key) const {
    std::vector<double> out;
    for (const auto& item : get_list(key)) out.push_back(parse_double(key, item));
    return out;
}

std::string RunConfig::resolved() const {
    std::string out;
    for (const auto& k : known_keys()) {
        out += k.name;
        out += '=';
        out += raw(k.name);
        out += '\n';
    }
    return out;
}

}  // namespace reprodiff::cli

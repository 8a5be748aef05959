// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "reprodiff/dataset.hpp"
#include "reprodiff/error.hpp"
#include "reprodiff/metrics.hpp"
#include "reprodiff/tensor_file.hpp"
#include "reprodiff_cli/commands.hpp"
#include "reprodiff_cli/run_config.hpp"
#include "test_support.hpp"

using namespace reprodiff;
using namespace reprodiff::cli;
using reprodiff::testing::read_file;
using reprodiff::testing::TempDir;
using reprodiff::testing::write_file;

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result invoke(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"reprodiff"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : storage) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    Result r;
    r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Small synthetic training set on disk plus a config pointing at it.
struct Workspace {
    TempDir dir{"cli"};
    fs::path config = dir / "run.cfg";

    Workspace() {
        write_file(dir / "make.cfg", "dataset.synthetic_count=12\ndataset.synthetic_height=4\n"
                                     "dataset.synthetic_width=4\nseed=5\n");
        REQUIRE(invoke({"make-dataset", "--config", (dir / "make.cfg").string(), "--out", (dir / "train").string()})
                    .code == 0);
        write_config("");
    }

    // Base settings, with any key repeated in `extra` taking the extra value.
    void write_config(const std::string& extra) const {
        const std::vector<std::string> base{"dataset.path=" + (dir / "train").string(), "sampler.steps=16",
                                            "sample.count=6", "experiment.grid=4", "experiment.anchor_noise_ids=0,1,3"};
        std::string text;
        for (const auto& line : base) {
            const std::string key = line.substr(0, line.find('=') + 1);
            if (("\n" + extra).find("\n" + key) == std::string::npos) text += line + "\n";
        }
        write_file(config, text + extra);
    }

    fs::path operator/(const std::string& name) const { return dir / name; }
};

}  // namespace

TEST_CASE("config parsing accepts comments and rejects unknown or duplicate keys") {
    const RunConfig cfg = RunConfig::parse("# comment\nseed = 7\n\nsampler.method=euler\n", "a.cfg");
    CHECK(cfg.get_uint("seed") == 7);
    CHECK(cfg.get_string("sampler.method") == "euler");
    CHECK(cfg.get_count("sampler.steps") == 64);
    CHECK(cfg.get_int_list("experiment.anchor_noise_ids") == std::vector<std::int64_t>{0, 1, 2});
    CHECK(cfg.get_bool("sampler.denoise_final"));
    CHECK_FALSE(cfg.get_optional_double("metrics.threshold").has_value());

    const auto message = [](const std::string& text) {
        try {
            (void)RunConfig::parse(text, "b.cfg");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("sampler.methd=euler\n").find("sampler.methd") != std::string::npos);
    CHECK(message("seed=1\nseed=2\n").find("b.cfg:2") != std::string::npos);
    CHECK(message("seed\n").find("b.cfg:1") != std::string::npos);

    RunConfig bad = RunConfig::parse("sampler.steps=zero\n");
    CHECK_THROWS_AS((void)bad.get_count("sampler.steps"), ConfigError);
    bad.set("sampler.steps", "0");
    CHECK_THROWS_AS((void)bad.get_count("sampler.steps"), ConfigError);
    CHECK_THROWS_AS((void)bad.require_string("dataset.path"), ConfigError);
}

TEST_CASE("resolved config lists every known key once") {
    const RunConfig cfg = RunConfig::parse("seed=3\n");
    const std::string text = cfg.resolved();
    for (const auto& key : known_keys()) {
        const std::string line = std::string(key.name) + "=";
        const bool present = text.find("\n" + line) != std::string::npos || text.rfind(line, 0) == 0;
        CHECK_MESSAGE(present, line);
    }
    CHECK(text.find("seed=3\n") != std::string::npos);
    CHECK(text.find("sampler.method=heun2\n") != std::string::npos);
}

TEST_CASE("sampling is deterministic, echoes its config and ignores thread count") {
    Workspace ws;
    REQUIRE(invoke({"sample", "--config", ws.config.string(), "--out", (ws / "a").string()}).code == 0);
    REQUIRE(invoke({"sample", "--config", ws.config.string(), "--out", (ws / "b").string(), "--threads", "4"}).code ==
            0);
    CHECK(read_file(ws / "a/samples.drtf") == read_file(ws / "b/samples.drtf"));
    CHECK(read_file(ws / "a/manifest.txt") == read_file(ws / "b/manifest.txt"));
    const std::string echoed = read_file(ws / "a/config.txt");
    CHECK(echoed.find("sample.count=6\n") != std::string::npos);
    CHECK(echoed.find("schedule.kind=vp\n") != std::string::npos);
    const SampleSet set = SampleSet::load(ws / "a");
    CHECK(set.size() == 6);
    CHECK(set.model_id() == "heun2-16");

    REQUIRE(invoke({"sample", "--config", ws.config.string(), "--out", (ws / "c").string(), "--seed", "9"}).code == 0);
    CHECK(read_file(ws / "c/samples.drtf") != read_file(ws / "a/samples.drtf"));
    CHECK(read_file(ws / "c/config.txt").find("seed=9\n") != std::string::npos);
}

TEST_CASE("missing inputs and bad keys exit with code 1") {
    TempDir dir("cli");
    write_file(dir / "empty.cfg", "sample.count=2\n");
    const Result missing = invoke({"sample", "--config", (dir / "empty.cfg").string(), "--out", (dir / "o").string()});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("dataset.path") != std::string::npos);

    write_file(dir / "unknown.cfg", "sampler.colour=red\n");
    const Result unknown =
        invoke({"sample", "--config", (dir / "unknown.cfg").string(), "--out", (dir / "o").string()});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("sampler.colour") != std::string::npos);

    CHECK(invoke({"sample", "--out"}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("scores reproduce the checked-in golden matrix") {
    TempDir dir("cli");
    const auto sets = reprodiff::testing::constructed_score_sets();
    for (const auto& s : sets) s.save(dir / s.model_id());
    write_file(dir / "scores.cfg", "metrics.metric=rp\n");
    const Result r = invoke({"scores", "--config", (dir / "scores.cfg").string(), "--out", (dir / "out").string(),
                             (dir / "ref").string(), (dir / "one_flip").string(), (dir / "two_flip").string()});
    REQUIRE(r.code == 0);
    CHECK(read_file(dir / "out/scores.csv") == read_file(fs::path(REPRODIFF_TEST_DATA_DIR) / "scores_3set.csv"));

    write_file(dir / "mae.cfg", "metrics.metric=mae\n");
    REQUIRE(invoke({"scores", "--config", (dir / "mae.cfg").string(), "--out", (dir / "mae").string(),
                    (dir / "ref").string(), (dir / "one_flip").string(), (dir / "two_flip").string()})
                .code == 0);
    CHECK(read_file(dir / "mae/scores.csv") == read_file(fs::path(REPRODIFF_TEST_DATA_DIR) / "scores_3set.csv"));
}

TEST_CASE("scores with disjoint noise ids name the offending pair") {
    TempDir dir("cli");
    const auto sets = reprodiff::testing::constructed_score_sets();
    sets[0].save(dir / "ref");
    SampleSet(sets[1].model_id(), sets[1].images(), {10, 11, 12, 13}).save(dir / "shifted");
    write_file(dir / "s.cfg", "");
    const Result r = invoke({"scores", "--config", (dir / "s.cfg").string(), "--out", (dir / "out").string(),
                             (dir / "ref").string(), (dir / "shifted").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("'ref' and 'one_flip'") != std::string::npos);
}

TEST_CASE("scores of a sample set against its training data writes gl.csv") {
    Workspace ws;
    ws.write_config("sampler.steps=32\n");
    REQUIRE(invoke({"sample", "--config", ws.config.string(), "--out", (ws / "s").string()}).code == 0);
    REQUIRE(invoke({"scores", "--config", ws.config.string(), "--out", (ws / "sc").string(), (ws / "s").string()})
                .code == 0);
    CHECK(read_file(ws / "sc/scores.csv") == "model,heun2-32\nheun2-32,1.000000\n");
    CHECK(read_file(ws / "sc/gl.csv") == "model,gl_score\nheun2-32,0.000000\n");
}

TEST_CASE("hyperplane corners map to their anchors") {
    Workspace ws;
    REQUIRE(invoke({"hyperplane", "--config", ws.config.string(), "--out", (ws / "h").string()}).code == 0);
    const std::string corners = read_file(ws / "h/corners.csv");
    std::istringstream in(corners);
    std::string line;
    std::getline(in, line);
    CHECK(line == "alpha,beta,class,similarity");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    for (int k = 0; k < 3; ++k) {
        const auto c = rows[k].find(',', rows[k].find(',') + 1);
        CHECK(rows[k].substr(c + 1, 1) == std::to_string(k + 1));
    }
    const std::string cells = read_file(ws / "h/hyperplane.csv");
    CHECK(std::count(cells.begin(), cells.end(), '\n') == 17);
    CHECK(fs::exists(ws / "h/hyperplane.pgm"));
    CHECK(fs::exists(ws / "h/anchors.drtf"));
}

TEST_CASE("sweep writes one row per size") {
    Workspace ws;
    ws.write_config("experiment.sizes=2,6,12\nexperiment.samplers=euler:32,heun2:16\nexperiment.samples=4\n");
    REQUIRE(invoke({"sweep", "--config", ws.config.string(), "--out", (ws / "sw").string()}).code == 0);
    const std::string csv = read_file(ws / "sw/sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("\n2,") != std::string::npos);
    CHECK(csv.find("\n12,") != std::string::npos);

    ws.write_config("experiment.sizes=2,99\nexperiment.samples=2\n");
    CHECK(invoke({"sweep", "--config", ws.config.string(), "--out", (ws / "bad").string()}).code == 1);
}

TEST_CASE("inpainting writes the mask, observations and reconstructions") {
    Workspace ws;
    ws.write_config("inverse.xi=0.02\ninverse.count=2\n");
    REQUIRE(invoke({"inpaint", "--config", ws.config.string(), "--out", (ws / "ip").string()}).code == 0);
    for (const char* name : {"mask.pgm", "observations.drtf", "reconstructions.drtf", "observation_0000.png",
                             "reconstruction_0001.png", "inpaint.csv", "config.txt"}) {
        CHECK_MESSAGE(fs::exists(ws / ("ip/" + std::string(name))), name);
    }
    const std::string csv = read_file(ws / "ip/inpaint.csv");
    CHECK(csv.rfind("target_index,noise_id,observed_mae,nearest_train,nearest_mae\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("encode needs inputs") {
    Workspace ws;
    const Result r = invoke({"encode", "--config", ws.config.string(), "--out", (ws / "e").string()});
    CHECK(r.code == 1);
}

TEST_CASE("encode then sample from the codes round trips") {
    Workspace ws;
    ws.write_config("sampler.grid=logsnr\nsampler.steps=128\nsampler.denoise_final=false\n");
    REQUIRE(invoke({"encode", "--config", ws.config.string(), "--out", (ws / "enc").string(),
                    (ws / "train").string()})
                .code == 0);
    ws.write_config("sampler.grid=logsnr\nsampler.steps=128\nsampler.denoise_final=false\nsample.count=12\n"
                    "sample.noise_path=" +
                    (ws / "enc/codes.drtf").string() + "\n");
    REQUIRE(invoke({"sample", "--config", ws.config.string(), "--out", (ws / "dec").string()}).code == 0);
    const Dataset train = load_dataset(ws / "train");
    const SampleSet back = SampleSet::load(ws / "dec");
    REQUIRE(back.size() == train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const double err = std::sqrt(squared_distance(back.images()[i].values(), train[i].values())) /
                           norm2(train[i].values());
        CHECK(err < 1e-2);
    }
}

TEST_CASE("non-finite initial states are input errors") {
    Workspace ws;
    Tensor t;
    t.dims = {1, 4, 4, 3};
    t.values.assign(48, 0.0f);
    t.values[5] = std::numeric_limits<float>::quiet_NaN();
    write_tensor(ws / "nan.drtf", t);
    ws.write_config("sample.count=1\nsample.noise_path=" + (ws / "nan.drtf").string() + "\n");
    const Result r = invoke({"sample", "--config", ws.config.string(), "--out", (ws / "n").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("non-finite") != std::string::npos);
}

TEST_CASE("errors map to exit codes 1 and 2") {
    const Invocation inv;
    std::ostringstream err;
    const auto throwing = [](auto make) { return [make](const Invocation&) { throw make(); }; };
    CHECK(run_guarded([](const Invocation&) {}, inv, err) == kExitOk);
    CHECK(run_guarded(throwing([] { return ConfigError("bad key"); }), inv, err) == kExitInputError);
    CHECK(run_guarded(throwing([] { return InvalidArgument("bad value"); }), inv, err) == kExitInputError);
    CHECK(run_guarded(throwing([] { return IoError("no file"); }), inv, err) == kExitInputError);
    CHECK(run_guarded(throwing([] { return FormatError("bad bytes"); }), inv, err) == kExitInputError);
    CHECK(run_guarded(throwing([] { return NumericalError("diverged"); }), inv, err) == kExitRuntimeError);
    CHECK(run_guarded(throwing([] { return std::runtime_error("other"); }), inv, err) == kExitRuntimeError);
    CHECK(err.str().find("diverged") != std::string::npos);
}

TEST_CASE("the installed executable runs end to end") {
    Workspace ws;
    const std::string cmd = std::string("\"") + REPRODIFF_TOOL_PATH + "\" sample --config \"" + ws.config.string() +
                            "\" --out \"" + (ws / "p").string() + "\" > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    REQUIRE(invoke({"sample", "--config", ws.config.string(), "--out", (ws / "q").string()}).code == 0);
    CHECK(read_file(ws / "p/samples.drtf") == read_file(ws / "q/samples.drtf"));

    const std::string bad = std::string("\"") + REPRODIFF_TOOL_PATH + "\" sample --out \"" + (ws / "r").string() +
                            "\" > /dev/null 2>&1";
    const int bad_status = std::system(bad.c_str());
    REQUIRE(WIFEXITED(bad_status));
    CHECK(WEXITSTATUS(bad_status) == 1);
}

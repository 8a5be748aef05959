// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "reprodiff_cli/commands.hpp"

namespace reprodiff::cli {

namespace {

struct CommandSpec {
    const char* name;
    const char* help;
    void (*fn)(const Invocation&);
    const char* inputs_help;  // nullptr when the command takes no positional inputs
};

constexpr CommandSpec kCommands[] = {
    {"make-dataset", "Write a synthetic training set of PNG images", cmd_make_dataset, nullptr},
    {"sample", "Generate images from seeded initial noise", cmd_sample, nullptr},
    {"encode", "Map images to their noise codes", cmd_encode, "Images, image directories or TensorFiles"},
    {"scores", "Reproducibility or MAE score matrix over sample sets", cmd_scores, "Sample-set directories"},
    {"hyperplane", "Classify generations over a plane of initial noises", cmd_hyperplane, nullptr},
    {"sweep", "Memorization metrics across dataset sizes", cmd_sweep, nullptr},
    {"inpaint", "Deterministic posterior-sampling inpainting", cmd_inpaint, nullptr},
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reproducibility experiments with the closed-form diffusion denoiser", "reprodiff"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;

    const CommandSpec* chosen = nullptr;
    for (const auto& spec : kCommands) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        sub->add_option("--config", config_path, "key=value configuration file");
        sub->add_option("--out", out_dir, "Output directory")->required();
        sub->add_option("--threads", threads, "Worker threads (results do not depend on it)")
            ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
        sub->add_option("--seed", seed, "Overrides the configured seed");
        if (spec.inputs_help) sub->add_option("inputs", inputs, spec.inputs_help);
        sub->callback([&chosen, &spec] { chosen = &spec; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }

    Invocation inv;
    inv.out_dir = out_dir;
    inv.threads = threads;
    inv.inputs.assign(inputs.begin(), inputs.end());
    return run_guarded(
        [&](const Invocation&) {
            inv.config = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
            if (seed) inv.config.set("seed", std::to_string(*seed));
            chosen->fn(inv);
        },
        inv, err);
}

}  // namespace reprodiff::cli

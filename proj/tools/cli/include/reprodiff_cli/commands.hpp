// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "reprodiff_cli/run_config.hpp"

namespace reprodiff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitRuntimeError = 2;

struct Invocation {
    RunConfig config;
    std::filesystem::path out_dir;
    std::size_t threads = 1;
    std::vector<std::filesystem::path> inputs;
};

// Each command writes into out_dir (created if needed), starting with the
// resolved configuration in config.txt. Errors propagate as exceptions.

/// Synthetic training set as PNG files plus labels.txt.
void cmd_make_dataset(const Invocation& inv);
/// Seeded generation: samples.drtf, manifest.txt, optional grid.png.
void cmd_sample(const Invocation& inv);
/// Encodes the input images (files, directories or TensorFiles) to codes.drtf.
void cmd_encode(const Invocation& inv);
/// Score matrix over the input sample-set directories (scores.csv), plus
/// gl.csv when a dataset is configured.
void cmd_scores(const Invocation& inv);
/// hyperplane.csv, corners.csv, hyperplane.pgm and anchors.drtf.
void cmd_hyperplane(const Invocation& inv);
/// sweep.csv with one row per dataset size.
void cmd_sweep(const Invocation& inv);
/// mask.pgm, observations.drtf, reconstructions.drtf, per-target PNGs and inpaint.csv.
void cmd_inpaint(const Invocation& inv);

/// Runs `command`, printing any error to `err` and mapping it to an exit code:
/// configuration and input problems give 1, numerical and other failures 2.
int run_guarded(const std::function<void(const Invocation&)>& command, const Invocation& inv, std::ostream& err);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reprodiff::cli

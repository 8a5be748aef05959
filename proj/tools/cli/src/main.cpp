// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "reprodiff_cli/commands.hpp"

int main(int argc, char** argv) { return reprodiff::cli::run(argc, argv, std::cout, std::cerr); }

// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reprodiff/error.hpp"

namespace reprodiff::cli {

/// Invalid or missing configuration; the message names the offending key.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct KeyInfo {
    std::string_view name;
    std::string_view default_value;  // empty means unset
    std::string_view help;
};

/// Every recognised key in canonical (echo) order.
[[nodiscard]] const std::vector<KeyInfo>& known_keys();

/// Flat key=value run configuration.
///
/// Lines are "key = value"; blank lines and lines starting with '#' are
/// ignored. Unknown and repeated keys are rejected. Unset keys fall back to
/// their defaults; typed getters throw ConfigError naming the key.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig parse(std::string_view text, std::string_view origin = "<config>");
    static RunConfig load(const std::filesystem::path& path);

    void set(std::string_view key, std::string value);
    [[nodiscard]] bool has(std::string_view key) const;

    [[nodiscard]] std::string get_string(std::string_view key) const;
    /// Throws ConfigError when the key resolves to an empty value.
    [[nodiscard]] std::string require_string(std::string_view key) const;
    [[nodiscard]] std::int64_t get_int(std::string_view key) const;
    [[nodiscard]] std::uint64_t get_uint(std::string_view key) const;
    [[nodiscard]] std::size_t get_count(std::string_view key) const;  // >= 1
    [[nodiscard]] double get_double(std::string_view key) const;
    [[nodiscard]] std::optional<double> get_optional_double(std::string_view key) const;
    [[nodiscard]] std::optional<std::uint64_t> get_optional_uint(std::string_view key) const;
    [[nodiscard]] bool get_bool(std::string_view key) const;
    /// Comma-separated list; empty items are rejected.
    [[nodiscard]] std::vector<std::string> get_list(std::string_view key) const;
    [[nodiscard]] std::vector<std::int64_t> get_int_list(std::string_view key) const;
    [[nodiscard]] std::vector<std::size_t> get_count_list(std::string_view key) const;
    [[nodiscard]] std::vector<double> get_double_list(std::string_view key) const;

    /// All known keys with defaults resolved, one "key=value" line each.
    [[nodiscard]] std::string resolved() const;

private:
    [[nodiscard]] std::string raw(std::string_view key) const;

    std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace reprodiff::cli

// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gennape::cli {

/// Everything needed to rerun one CLI invocation bit for bit.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;  // fully expanded, config file already merged
  nlohmann::ordered_json config;  // resolved option values, defaults included
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
};

/// FNV-1a of the file bytes as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Hashes inputs and outputs at call time.
std::string manifest_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

struct LoadedManifest {
  std::string command;
  std::vector<std::string> args;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
};
LoadedManifest read_manifest(const std::filesystem::path& path);

/// Flat "key = value" lines; '#' starts a comment. Returns "--key value" pairs
/// (a bare "key" or a value of true yields a flag).
std::vector<std::string> config_file_args(const std::filesystem::path& path);

}  // namespace gennape::cli

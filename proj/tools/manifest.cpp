// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gennape/error.hpp"
#include "gennape/graph_io.hpp"
#include "gennape/rng.hpp"

namespace gennape::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string file_digest(const std::filesystem::path& path) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(read_file(path))));
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "gennape";
  j["command"] = m.command;
  j["args"] = m.args;
  j["config"] = m.config;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.inputs) j["inputs"].push_back({{"path", p.string()}, {"fnv1a", file_digest(p)}});
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.outputs) j["outputs"].push_back({{"path", p.string()}, {"fnv1a", file_digest(p)}});
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) { write_file(path, manifest_json(m)); }

LoadedManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, "manifest: " + std::string(e.what()));
  }
  LoadedManifest out;
  try {
    out.command = j.at("command").get<std::string>();
    out.args = j.at("args").get<std::vector<std::string>>();
    for (const auto& in : j.at("inputs")) {
      out.inputs.emplace_back(in.at("path").get<std::string>(), in.at("fnv1a").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "manifest schema: " + std::string(e.what()));
  }
  return out;
}

std::vector<std::string> config_file_args(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> args;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || key.find(' ') != std::string::npos) throw ParseError(line_start, "config: bad key in '" + line + "'");
    if (eq == std::string::npos) {
      args.push_back("--" + key);
      continue;
    }
    const std::string value = trim(line.substr(eq + 1));
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace gennape::cli

// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gennape/compute_graph.hpp"

namespace gennape {

// JSON encoding of one graph:
//   {"name": str,
//    "nodes": [{"kind": str, "in": [h,w,c], "out": [h,w,c], "weight": [ints]|null, "bias": bool}],
//    "edges": [[src,dst], ...]}

/// Compact single-line JSON. Byte-stable for equal graphs.
std::string serialize(const ComputeGraph& cg);

/// Throws ParseError (malformed bytes or schema) or ValidationError (decoded
/// graph breaks a graph invariant).
ComputeGraph deserialize(std::string_view bytes);

/// One labeled architecture; a dataset file holds one record per line:
///   {"graph": <graph>, "accuracy": float in [0,1], "flops_g": float}
struct DatasetRecord {
  ComputeGraph graph;
  double accuracy = 0.0;
  double flops_g = 0.0;
};

std::string serialize_record(const DatasetRecord& record);
std::string serialize_dataset(const std::vector<DatasetRecord>& records);
/// ParseError offsets are relative to the start of `text`.
std::vector<DatasetRecord> parse_dataset(std::string_view text);

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

/// Whole-file helpers shared by the persistence code.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace gennape

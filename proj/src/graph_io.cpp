// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gennape/error.hpp"

namespace gennape {
namespace {

using ojson = nlohmann::ordered_json;

ojson shape_json(const TensorShape& s) { return ojson::array({s.height, s.width, s.channels}); }

ojson graph_json(const ComputeGraph& cg) {
  ojson nodes = ojson::array();
  for (const auto& n : cg.nodes()) {
    ojson node;
    node["kind"] = std::string(op_kind_name(n.kind));
    node["in"] = shape_json(n.input_shape);
    node["out"] = shape_json(n.output_shape);
    node["weight"] = n.weight_shape ? ojson(*n.weight_shape) : ojson(nullptr);
    node["bias"] = n.has_bias;
    nodes.push_back(std::move(node));
  }
  ojson edges = ojson::array();
  for (const auto& [s, d] : cg.edges()) edges.push_back(ojson::array({s, d}));
  ojson j;
  j["name"] = cg.name();
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

[[noreturn]] void schema_error(std::size_t offset, const std::string& what) {
  throw ParseError(offset, "schema: " + what);
}

int int_field(const ojson& v, std::size_t offset, const char* what) {
  if (!v.is_number_integer()) schema_error(offset, std::string(what) + " must be an integer");
  return v.get<int>();
}

TensorShape parse_shape(const ojson& v, std::size_t offset, const char* what) {
  if (!v.is_array() || v.size() != 3) schema_error(offset, std::string(what) + " must be [h,w,c]");
  return {int_field(v[0], offset, what), int_field(v[1], offset, what), int_field(v[2], offset, what)};
}

ComputeGraph graph_from_json(const ojson& j, std::size_t offset) {
  if (!j.is_object()) schema_error(offset, "graph must be an object");
  if (!j.contains("name") || !j["name"].is_string()) schema_error(offset, "missing string 'name'");
  if (!j.contains("nodes") || !j["nodes"].is_array()) schema_error(offset, "missing array 'nodes'");
  if (!j.contains("edges") || !j["edges"].is_array()) schema_error(offset, "missing array 'edges'");

  std::vector<NodeAttrs> nodes;
  for (const auto& n : j["nodes"]) {
    if (!n.is_object()) schema_error(offset, "node must be an object");
    NodeAttrs attrs;
    if (!n.contains("kind") || !n["kind"].is_string()) schema_error(offset, "node missing 'kind'");
    auto kind = op_kind_from_name(n["kind"].get<std::string>());
    if (!kind) schema_error(offset, "unknown op kind '" + n["kind"].get<std::string>() + "'");
    attrs.kind = *kind;
    if (!n.contains("in") || !n.contains("out")) schema_error(offset, "node missing 'in'/'out'");
    attrs.input_shape = parse_shape(n["in"], offset, "in");
    attrs.output_shape = parse_shape(n["out"], offset, "out");
    if (n.contains("weight") && !n["weight"].is_null()) {
      if (!n["weight"].is_array()) schema_error(offset, "'weight' must be an array or null");
      std::vector<int> w;
      for (const auto& d : n["weight"]) w.push_back(int_field(d, offset, "weight"));
      attrs.weight_shape = std::move(w);
    }
    if (n.contains("bias")) {
      if (!n["bias"].is_boolean()) schema_error(offset, "'bias' must be a boolean");
      attrs.has_bias = n["bias"].get<bool>();
    }
    nodes.push_back(std::move(attrs));
  }
  std::vector<Edge> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) schema_error(offset, "edge must be [src,dst]");
    edges.emplace_back(int_field(e[0], offset, "edge"), int_field(e[1], offset, "edge"));
  }
  try {
    return build_graph(std::move(nodes), std::move(edges), j["name"].get<std::string>());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
}

ojson parse_json(std::string_view text, std::size_t base_offset) {
  try {
    return ojson::parse(text.begin(), text.end());
  } catch (const ojson::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(base_offset + at, e.what());
  }
}

double number_field(const ojson& j, const char* key, std::size_t offset) {
  if (!j.contains(key) || !j[key].is_number()) {
    schema_error(offset, std::string("record missing number '") + key + "'");
  }
  return j[key].get<double>();
}

}  // namespace

std::string serialize(const ComputeGraph& cg) { return graph_json(cg).dump(); }

ComputeGraph deserialize(std::string_view bytes) { return graph_from_json(parse_json(bytes, 0), 0); }

std::string serialize_record(const DatasetRecord& record) {
  ojson j;
  j["graph"] = graph_json(record.graph);
  j["accuracy"] = record.accuracy;
  j["flops_g"] = record.flops_g;
  return j.dump();
}

std::string serialize_dataset(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

std::vector<DatasetRecord> parse_dataset(std::string_view text) {
  std::vector<DatasetRecord> records;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      const ojson j = parse_json(line, pos);
      if (!j.is_object() || !j.contains("graph")) schema_error(pos, "record missing 'graph'");
      DatasetRecord r{graph_from_json(j["graph"], pos), number_field(j, "accuracy", pos),
                      number_field(j, "flops_g", pos)};
      records.push_back(std::move(r));
    }
    pos = end + 1;
  }
  return records;
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  write_file(path, serialize_dataset(records));
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace gennape

// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/compute_graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "gennape/error.hpp"

namespace gennape {
namespace {

constexpr std::array<std::string_view, kNumOpKinds> kOpNames = {
    "input",   "output",  "conv2d",   "depthwise_conv2d", "linear",          "batch_norm",
    "relu",    "swish",   "sigmoid",  "tanh",             "max_pool",        "avg_pool",
    "global_avg_pool",    "add",      "concat",           "mean",            "identity",
};

std::string shape_str(const TensorShape& s) {
  return "(" + std::to_string(s.height) + "," + std::to_string(s.width) + "," +
         std::to_string(s.channels) + ")";
}

std::string node_str(const NodeAttrs& n, std::size_t index) {
  return "node " + std::to_string(index) + " [" + std::string(op_kind_name(n.kind)) + "]";
}

bool valid_shape(const TensorShape& s) { return s.height >= 1 && s.width >= 1 && s.channels >= 1; }

// True when `out` is `in` downsampled by a common stride with "same" padding.
bool spatial_reduction_ok(const TensorShape& in, const TensorShape& out) {
  const int limit = std::max(in.height, in.width);
  for (int s = 1; s <= limit; ++s) {
    if (strided(in.height, s) == out.height && strided(in.width, s) == out.width) return true;
  }
  return false;
}

void check_node(const NodeAttrs& n, std::size_t i) {
  const auto where = [&] { return node_str(n, i); };
  if (!valid_shape(n.input_shape) || !valid_shape(n.output_shape)) {
    throw ShapeMismatch(where() + ": tensor dimensions must be >= 1");
  }
  if (has_weights(n.kind) != n.weight_shape.has_value()) {
    throw ShapeMismatch(where() + ": weight shape present iff the op has weights");
  }
  if (!n.weight_shape && n.has_bias) throw ShapeMismatch(where() + ": bias without weights");
  if (n.weight_shape) {
    for (int d : *n.weight_shape) {
      if (d < 1) throw ShapeMismatch(where() + ": weight dimensions must be >= 1");
    }
  }
  const TensorShape& in = n.input_shape;
  const TensorShape& out = n.output_shape;
  switch (n.kind) {
    case OpKind::kConv2d: {
      const auto& w = *n.weight_shape;
      if (w.size() != 4 || w[0] != out.channels || w[1] != in.channels ||
          !spatial_reduction_ok(in, out)) {
        throw ShapeMismatch(where() + ": conv " + shape_str(in) + " -> " + shape_str(out) +
                            " inconsistent with weights");
      }
      return;
    }
    case OpKind::kDepthwiseConv2d: {
      const auto& w = *n.weight_shape;
      if (w.size() != 4 || w[1] != 1 || w[0] != in.channels || in.channels != out.channels ||
          !spatial_reduction_ok(in, out)) {
        throw ShapeMismatch(where() + ": depthwise conv " + shape_str(in) + " -> " +
                            shape_str(out) + " inconsistent with weights");
      }
      return;
    }
    case OpKind::kLinear: {
      const auto& w = *n.weight_shape;
      if (w.size() != 2 || in.height != 1 || in.width != 1 || out.height != 1 ||
          out.width != 1 || w[0] != out.channels || w[1] != in.channels) {
        throw ShapeMismatch(where() + ": linear " + shape_str(in) + " -> " + shape_str(out) +
                            " inconsistent with weights");
      }
      return;
    }
    case OpKind::kMaxPool:
    case OpKind::kAvgPool:
      if (in.channels != out.channels || !spatial_reduction_ok(in, out)) {
        throw ShapeMismatch(where() + ": pooling " + shape_str(in) + " -> " + shape_str(out));
      }
      return;
    case OpKind::kGlobalAvgPool:
      if (out != TensorShape{1, 1, in.channels}) {
        throw ShapeMismatch(where() + ": global pooling must produce (1,1,C)");
      }
      return;
    case OpKind::kConcat:
      if (in != out) throw ShapeMismatch(where() + ": concat input/output shapes differ");
      return;
    default:
      if (in != out) {
        throw ShapeMismatch(where() + ": shape-preserving op " + shape_str(in) + " -> " +
                            shape_str(out));
      }
      return;
  }
}

}  // namespace

std::string_view op_kind_name(OpKind kind) { return kOpNames[static_cast<std::size_t>(kind)]; }

std::optional<OpKind> op_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumOpKinds; ++i) {
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  }
  return std::nullopt;
}

bool has_weights(OpKind kind) {
  return kind == OpKind::kConv2d || kind == OpKind::kDepthwiseConv2d || kind == OpKind::kLinear;
}

bool is_merge(OpKind kind) {
  return kind == OpKind::kAdd || kind == OpKind::kConcat || kind == OpKind::kMean;
}

bool is_activation(OpKind kind) {
  return kind == OpKind::kRelu || kind == OpKind::kSwish || kind == OpKind::kSigmoid ||
         kind == OpKind::kTanh;
}

ComputeGraph ComputeGraph::renamed(std::string name) const {
  ComputeGraph g = *this;
  g.name_ = std::move(name);
  return g;
}

ComputeGraph build_graph(std::vector<NodeAttrs> nodes, std::vector<Edge> edges, std::string name) {
  const std::size_t n = nodes.size();
  if (n == 0) throw TopologyError("graph has no nodes");

  std::set<Edge> seen;
  for (const auto& [s, d] : edges) {
    if (s < 0 || d < 0 || static_cast<std::size_t>(s) >= n || static_cast<std::size_t>(d) >= n) {
      throw TopologyError("edge (" + std::to_string(s) + "," + std::to_string(d) +
                          ") references a node out of range");
    }
    if (s == d) throw CycleError("self loop on node " + std::to_string(s));
    if (!seen.insert({s, d}).second) {
      throw TopologyError("duplicate edge (" + std::to_string(s) + "," + std::to_string(d) + ")");
    }
  }

  std::vector<std::vector<int>> succ(n), pred(n);
  for (const auto& [s, d] : edges) {
    succ[static_cast<std::size_t>(s)].push_back(d);
    pred[static_cast<std::size_t>(d)].push_back(s);
  }

  // Kahn's algorithm, smallest original index first.
  std::vector<int> indeg(n);
  for (std::size_t i = 0; i < n; ++i) indeg[i] = static_cast<int>(pred[i].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v : succ[static_cast<std::size_t>(u)]) {
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
  }
  if (order.size() != n) throw CycleError("edges do not form a DAG");

  // Topology: one input (source), one output (sink), single-input unless merge.
  int input = -1, output = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = nodes[i];
    if (node.kind == OpKind::kInput) {
      if (input >= 0) throw TopologyError("more than one input node");
      input = static_cast<int>(i);
    } else if (node.kind == OpKind::kOutput) {
      if (output >= 0) throw TopologyError("more than one output node");
      output = static_cast<int>(i);
    }
  }
  if (input < 0) throw TopologyError("missing input node");
  if (output < 0) throw TopologyError("missing output node");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = nodes[i];
    const std::size_t in_deg = pred[i].size();
    const std::size_t out_deg = succ[i].size();
    if (node.kind == OpKind::kInput) {
      if (in_deg != 0) throw TopologyError(node_str(node, i) + " has incoming edges");
    } else if (in_deg == 0) {
      throw TopologyError(node_str(node, i) + " is unreachable from the input");
    } else if (!is_merge(node.kind) && in_deg != 1) {
      throw TopologyError(node_str(node, i) + " has " + std::to_string(in_deg) +
                          " inputs but is not a merge op");
    }
    if (node.kind == OpKind::kOutput) {
      if (out_deg != 0) throw TopologyError(node_str(node, i) + " has outgoing edges");
    } else if (out_deg == 0) {
      throw TopologyError(node_str(node, i) + " does not reach the output");
    }
  }

  // Shapes.
  for (std::size_t i = 0; i < n; ++i) check_node(nodes[i], i);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& dst = nodes[i];
    if (dst.kind == OpKind::kConcat) {
      int channels = 0;
      for (int s : pred[i]) {
        const auto& so = nodes[static_cast<std::size_t>(s)].output_shape;
        if (so.height != dst.input_shape.height || so.width != dst.input_shape.width) {
          throw ShapeMismatch("edge (" + std::to_string(s) + "," + std::to_string(i) +
                              "): concat spatial mismatch " + shape_str(so) + " vs " +
                              shape_str(dst.input_shape));
        }
        channels += so.channels;
      }
      if (channels != dst.input_shape.channels) {
        throw ShapeMismatch(node_str(dst, i) + ": concat channels " + std::to_string(channels) +
                            " != " + std::to_string(dst.input_shape.channels));
      }
    } else {
      for (int s : pred[i]) {
        const auto& so = nodes[static_cast<std::size_t>(s)].output_shape;
        if (so != dst.input_shape) {
          throw ShapeMismatch("edge (" + std::to_string(s) + "," + std::to_string(i) + "): " +
                              shape_str(so) + " not consumable as " + shape_str(dst.input_shape));
        }
      }
    }
  }

  // Canonicalize.
  std::vector<int> position(n);
  for (std::size_t k = 0; k < n; ++k) position[static_cast<std::size_t>(order[k])] = static_cast<int>(k);

  ComputeGraph g;
  g.name_ = std::move(name);
  g.nodes_.reserve(n);
  for (int old : order) g.nodes_.push_back(std::move(nodes[static_cast<std::size_t>(old)]));
  g.edges_.reserve(edges.size());
  for (const auto& [s, d] : edges) {
    g.edges_.emplace_back(position[static_cast<std::size_t>(s)], position[static_cast<std::size_t>(d)]);
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.preds_.assign(n, {});
  g.succs_.assign(n, {});
  for (const auto& [s, d] : g.edges_) {
    g.succs_[static_cast<std::size_t>(s)].push_back(d);
    g.preds_[static_cast<std::size_t>(d)].push_back(s);
  }
  g.input_ = position[static_cast<std::size_t>(input)];
  g.output_ = position[static_cast<std::size_t>(output)];
  return g;
}

double node_flops(const NodeAttrs& node) {
  const double out_elems = static_cast<double>(node.output_shape.elements());
  const double out_hw = static_cast<double>(node.output_shape.height) * node.output_shape.width;
  switch (node.kind) {
    case OpKind::kConv2d: {
      const auto& w = *node.weight_shape;
      double f = 2.0 * w[2] * w[3] * w[1] * w[0] * out_hw;
      if (node.has_bias) f += out_elems;
      return f;
    }
    case OpKind::kDepthwiseConv2d: {
      const auto& w = *node.weight_shape;
      double f = 2.0 * w[2] * w[3] * w[0] * out_hw;
      if (node.has_bias) f += out_elems;
      return f;
    }
    case OpKind::kLinear: {
      const auto& w = *node.weight_shape;
      double f = 2.0 * w[0] * w[1];
      if (node.has_bias) f += w[0];
      return f;
    }
    case OpKind::kBatchNorm:
    case OpKind::kRelu:
    case OpKind::kSwish:
    case OpKind::kSigmoid:
    case OpKind::kTanh:
    case OpKind::kAdd:
    case OpKind::kMean:
    case OpKind::kMaxPool:
    case OpKind::kAvgPool:
    case OpKind::kGlobalAvgPool:
      return out_elems;
    case OpKind::kConcat:
    case OpKind::kIdentity:
    case OpKind::kInput:
    case OpKind::kOutput:
      return 0.0;
  }
  return 0.0;
}

double compute_flops(const ComputeGraph& cg) {
  double total = 0.0;
  for (const auto& node : cg.nodes()) total += node_flops(node);
  return total / 1e9;
}

Matrix undirected_adjacency(std::size_t num_nodes, const std::vector<Edge>& edges) {
  const auto n = static_cast<Eigen::Index>(num_nodes);
  Matrix a = Matrix::Zero(n, n);
  for (const auto& [s, d] : edges) {
    if (s == d) continue;
    a(s, d) = 1.0;
    a(d, s) = 1.0;
  }
  return a;
}

Matrix undirected_adjacency(const ComputeGraph& cg) { return undirected_adjacency(cg.size(), cg.edges()); }

int graph_depth(const ComputeGraph& cg) {
  std::vector<int> depth(cg.size(), 1);
  for (std::size_t i = 0; i < cg.size(); ++i) {
    for (int p : cg.predecessors(static_cast<int>(i))) {
      depth[i] = std::max(depth[i], depth[static_cast<std::size_t>(p)] + 1);
    }
  }
  return depth[static_cast<std::size_t>(cg.output_node())];
}

NodeAttrs make_input(TensorShape shape) { return {OpKind::kInput, shape, shape, std::nullopt, false}; }
NodeAttrs make_output(TensorShape shape) { return {OpKind::kOutput, shape, shape, std::nullopt, false}; }

NodeAttrs make_conv(TensorShape in, int out_channels, int kernel, int stride, bool bias) {
  TensorShape out{strided(in.height, stride), strided(in.width, stride), out_channels};
  return {OpKind::kConv2d, in, out, std::vector<int>{out_channels, in.channels, kernel, kernel}, bias};
}

NodeAttrs make_depthwise(TensorShape in, int kernel, int stride, bool bias) {
  TensorShape out{strided(in.height, stride), strided(in.width, stride), in.channels};
  return {OpKind::kDepthwiseConv2d, in, out, std::vector<int>{in.channels, 1, kernel, kernel}, bias};
}

NodeAttrs make_linear(int in_features, int out_features, bool bias) {
  return {OpKind::kLinear, {1, 1, in_features}, {1, 1, out_features},
          std::vector<int>{out_features, in_features}, bias};
}

NodeAttrs make_pool(OpKind kind, TensorShape in, int stride) {
  TensorShape out{strided(in.height, stride), strided(in.width, stride), in.channels};
  return {kind, in, out, std::nullopt, false};
}

NodeAttrs make_global_pool(TensorShape in) {
  return {OpKind::kGlobalAvgPool, in, {1, 1, in.channels}, std::nullopt, false};
}

NodeAttrs make_unary(OpKind kind, TensorShape shape) { return {kind, shape, shape, std::nullopt, false}; }
NodeAttrs make_merge(OpKind kind, TensorShape shape) { return {kind, shape, shape, std::nullopt, false}; }
NodeAttrs make_concat(TensorShape out) { return {OpKind::kConcat, out, out, std::nullopt, false}; }

}  // namespace gennape

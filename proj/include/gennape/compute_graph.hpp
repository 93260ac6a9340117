// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gennape/linalg.hpp"

namespace gennape {

/// Atomic operator vocabulary of a computation graph.
enum class OpKind : std::uint8_t {
  kInput,
  kOutput,
  kConv2d,
  kDepthwiseConv2d,
  kLinear,
  kBatchNorm,
  kRelu,
  kSwish,
  kSigmoid,
  kTanh,
  kMaxPool,
  kAvgPool,
  kGlobalAvgPool,
  kAdd,
  kConcat,
  kMean,
  kIdentity,
};

inline constexpr std::size_t kNumOpKinds = 17;

std::string_view op_kind_name(OpKind kind);
/// Inverse of op_kind_name; nullopt for unknown names.
std::optional<OpKind> op_kind_from_name(std::string_view name);

bool has_weights(OpKind kind);
/// add / mean / concat: the only kinds that accept more than one input.
bool is_merge(OpKind kind);
bool is_activation(OpKind kind);

struct TensorShape {
  int height = 1;
  int width = 1;
  int channels = 1;

  std::int64_t elements() const {
    return static_cast<std::int64_t>(height) * width * channels;
  }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

/// Per-node features. Weight layout: conv2d [Cout, Cin, Kh, Kw];
/// depthwise_conv2d [C, 1, Kh, Kw]; linear [out, in].
struct NodeAttrs {
  OpKind kind = OpKind::kIdentity;
  TensorShape input_shape;
  TensorShape output_shape;
  std::optional<std::vector<int>> weight_shape;
  bool has_bias = false;

  friend bool operator==(const NodeAttrs&, const NodeAttrs&) = default;
};

using Edge = std::pair<int, int>;

/// Validated DAG of atomic operators. Only constructible through build_graph
/// (or deserialize), so every instance satisfies the graph invariants. Nodes
/// are stored in stable topological order and edges sorted.
class ComputeGraph {
 public:
  const std::vector<NodeAttrs>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::string& name() const { return name_; }
  std::size_t size() const { return nodes_.size(); }

  const std::vector<int>& predecessors(int node) const { return preds_[static_cast<std::size_t>(node)]; }
  const std::vector<int>& successors(int node) const { return succs_[static_cast<std::size_t>(node)]; }
  int input_node() const { return input_; }
  int output_node() const { return output_; }

  /// Same structure under a different name.
  ComputeGraph renamed(std::string name) const;

  friend bool operator==(const ComputeGraph& a, const ComputeGraph& b) {
    return a.name_ == b.name_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend ComputeGraph build_graph(std::vector<NodeAttrs>, std::vector<Edge>, std::string);

  std::vector<NodeAttrs> nodes_;
  std::vector<Edge> edges_;
  std::string name_;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
  int input_ = 0;
  int output_ = 0;
};

/// Validate and canonicalize. Nodes are reordered topologically (ties broken
/// by original index) and edges are remapped and sorted.
/// Throws CycleError, ShapeMismatch or TopologyError.
ComputeGraph build_graph(std::vector<NodeAttrs> nodes, std::vector<Edge> edges, std::string name);

/// FLOPs of one node (not divided by 1e9).
double node_flops(const NodeAttrs& node);
/// Total gigaFLOPs of a graph.
double compute_flops(const ComputeGraph& cg);

/// Symmetric 0/1 adjacency of the undirected skeleton of an edge list.
Matrix undirected_adjacency(std::size_t num_nodes, const std::vector<Edge>& edges);
Matrix undirected_adjacency(const ComputeGraph& cg);

/// Longest input-to-output path, counted in nodes.
int graph_depth(const ComputeGraph& cg);

// Node construction helpers.
NodeAttrs make_input(TensorShape shape);
NodeAttrs make_output(TensorShape shape);
NodeAttrs make_conv(TensorShape in, int out_channels, int kernel, int stride = 1, bool bias = false);
NodeAttrs make_depthwise(TensorShape in, int kernel, int stride = 1, bool bias = false);
NodeAttrs make_linear(int in_features, int out_features, bool bias = true);
NodeAttrs make_pool(OpKind kind, TensorShape in, int stride = 1);
NodeAttrs make_global_pool(TensorShape in);
/// Shape-preserving unary node (batch_norm, activations, identity).
NodeAttrs make_unary(OpKind kind, TensorShape shape);
/// add / mean: all inputs share `shape`.
NodeAttrs make_merge(OpKind kind, TensorShape shape);
NodeAttrs make_concat(TensorShape out);

/// Spatial size after an op with the given stride ("same" padding).
inline int strided(int size, int stride) { return (size + stride - 1) / stride; }

}  // namespace gennape

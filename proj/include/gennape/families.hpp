// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gennape/compute_graph.hpp"
#include "gennape/graph_io.hpp"

namespace gennape {

enum class FamilyKind { kNb101Like, kHiamlLike, kInceptionLike, kTwopathLike };

std::string_view family_name(FamilyKind kind);
std::optional<FamilyKind> family_from_name(std::string_view name);

/// Input tensor of every generated graph and the class count of its head.
inline constexpr TensorShape kFamilyInput{32, 32, 3};
inline constexpr int kFamilyClasses = 10;

/// n distinct valid graphs named "<family>-<index>". Deterministic in
/// (kind, n, seed). Throws GenerationExhausted after 100 * n draws.
std::vector<ComputeGraph> generate(FamilyKind kind, std::size_t n, std::uint64_t seed);

/// One draw from the family (may duplicate earlier draws).
ComputeGraph sample_graph(FamilyKind kind, std::uint64_t seed, const std::string& name);

// ---------------------------------------------------------------------------
// Structural views used by the family predicates.

/// Nodes whose output is spatially smaller than their input.
std::vector<int> downsampling_nodes(const ComputeGraph& cg);

/// Node ids grouped by stage. Stage boundaries are the downsampling nodes;
/// each boundary and the ops that immediately follow it (up to the next
/// block) form the stage transition and are excluded from blocks.
struct StageView {
  std::vector<std::vector<int>> blocks;  // node ids of each block, in topological order
};

/// Stages split at downsampling nodes, blocks delimited by `terminal` merge
/// nodes (add for residual blocks, concat for multi-path blocks).
std::vector<StageView> stage_blocks(const ComputeGraph& cg, OpKind terminal);

/// Order-independent description of a block: node kinds, shapes, weight
/// shapes and edges relative to the block's first node.
std::string block_signature(const ComputeGraph& cg, const std::vector<int>& block);

/// Parallel paths of a multi-path block: each path is the chain of nodes from
/// the block input to the terminal concat.
std::vector<std::vector<int>> block_paths(const ComputeGraph& cg, const std::vector<int>& block);

/// Conv2d / depthwise nodes are "Conv ops", pooling nodes are "Supp ops".
bool is_conv_op(OpKind kind);
bool is_supp_op(OpKind kind);

bool is_nb101_like(const ComputeGraph& cg);
bool is_hiaml_like(const ComputeGraph& cg);
bool is_inception_like(const ComputeGraph& cg);
bool is_twopath_like(const ComputeGraph& cg);
bool matches_family(FamilyKind kind, const ComputeGraph& cg);

/// Node-count lengths of the two chains of a two-path graph; empty when the
/// graph does not have exactly two parallel paths.
std::vector<int> twopath_lengths(const ComputeGraph& cg);

// ---------------------------------------------------------------------------
// Synthetic accuracy oracle

struct OracleConfig {
  double bias = 0.0;
  double w_depth = 0.0;
  double w_log_flops = 0.0;
  double w_lambda2 = 0.0;
  std::array<double, kNumOpKinds> w_ops{};  // weights on the op-kind fraction histogram
  double noise_std = 0.0;
  double lo = 0.80;
  double hi = 0.9409;
  std::uint64_t seed = 0;

  // Feature centering so the logistic stays in its responsive range.
  double depth_center = 40.0;
  double depth_scale = 20.0;
  double log_flops_center = -1.5;
};

/// The weights used for the bundled families; only the range and seed vary.
OracleConfig default_oracle(FamilyKind kind, std::uint64_t seed = 0);

struct OracleFeatures {
  double depth = 0.0;
  double log_flops = 0.0;  // log10 of gigaFLOPs
  double lambda2 = 0.0;    // second smallest normalized-Laplacian eigenvalue
  std::array<double, kNumOpKinds> op_fraction{};
};
OracleFeatures oracle_features(const ComputeGraph& cg);

/// lo + (hi - lo) * logistic(weighted features + seeded per-graph noise).
double oracle_accuracy(const ComputeGraph& cg, const OracleConfig& oracle);

std::vector<DatasetRecord> build_dataset(FamilyKind kind, std::size_t n, const OracleConfig& oracle,
                                         std::uint64_t seed);

/// Sidecar manifest: {"kind", "n", "seed", "oracle": {...}}.
std::string dataset_manifest_json(FamilyKind kind, std::size_t n, std::uint64_t seed, const OracleConfig& oracle);
std::string oracle_json(const OracleConfig& oracle);
OracleConfig oracle_from_json(std::string_view text);

}  // namespace gennape

// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gennape/compute_graph.hpp"
#include "gennape/rng.hpp"

namespace gennape {

struct SearchConfig {
  int iterations = 6;
  int top_k = 8;
  int mutations_per_parent = 16;
  std::optional<double> flops_budget;  // gigaFLOPs
  std::uint64_t seed = 0;
};

struct Candidate {
  ComputeGraph graph;
  double predicted = 0.0;
  double flops = 0.0;  // gigaFLOPs
};

struct TrajectoryEntry {
  int iter = 0;
  std::string name;
  double score = 0.0;
  double flops_g = 0.0;
  bool kept = false;
};

struct SearchResult {
  Candidate best;
  std::vector<Candidate> frontier;
  std::vector<TrajectoryEntry> trajectory;
};

/// Higher is better.
using Scorer = std::function<double(const ComputeGraph&)>;

/// Attempts allowed before mutate gives up and returns its input.
inline constexpr int kMutationAttempts = 20;

/// Replaces a chain of 1-3 single-input single-output operators (never the
/// input or output node) by a freshly sampled chain of 1-3 operators mapping
/// the same input shape to the same output shape. Returns a validated graph,
/// or the input unchanged after kMutationAttempts infeasible samples.
ComputeGraph mutate(const ComputeGraph& cg, Rng& rng);

/// Elitist local search: each iteration mutates every frontier member,
/// scores parents and children together, and keeps the top_k by score (lower
/// FLOPs breaks ties). Candidates above the FLOPs budget are never kept.
/// Throws EmptyFrontier if the seed exceeds the budget.
SearchResult local_search(const ComputeGraph& seed, const Scorer& predictor, const SearchConfig& config);

/// One JSON object per line: {"iter","name","score","flops_g","kept"}.
std::string trajectory_jsonl(const std::vector<TrajectoryEntry>& trajectory);

}  // namespace gennape

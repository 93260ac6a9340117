// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/search.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "gennape/error.hpp"
#include "gennape/graph_io.hpp"

namespace gennape {
namespace {

// A replaceable chain: consecutive single-input single-output non-merge nodes.
bool replaceable(const ComputeGraph& cg, int v) {
  const auto& n = cg.nodes()[static_cast<std::size_t>(v)];
  return n.kind != OpKind::kInput && n.kind != OpKind::kOutput && !is_merge(n.kind) &&
         cg.predecessors(v).size() == 1 && cg.successors(v).size() == 1;
}

std::vector<int> sample_chain(const ComputeGraph& cg, Rng& rng) {
  std::vector<int> starts;
  for (std::size_t i = 0; i < cg.size(); ++i) {
    if (replaceable(cg, static_cast<int>(i))) starts.push_back(static_cast<int>(i));
  }
  if (starts.empty()) return {};
  std::vector<int> chain{starts[rng.below(starts.size())]};
  const int want = rng.range(1, 3);
  while (static_cast<int>(chain.size()) < want) {
    const int next = cg.successors(chain.back())[0];
    if (!replaceable(cg, next)) break;
    chain.push_back(next);
  }
  return chain;
}

int stride_for(int from, int to) {
  for (int s = 1; s <= from; ++s) {
    if (strided(from, s) == to) return s;
  }
  return 0;
}

// One operator mapping `in` towards `target`. When `last` is set the result
// must equal target exactly; returns nullopt when the sampled kind cannot.
std::optional<NodeAttrs> sample_op(TensorShape in, TensorShape target, bool last, Rng& rng) {
  static constexpr OpKind kKinds[] = {OpKind::kConv2d,    OpKind::kConv2d,  OpKind::kDepthwiseConv2d,
                                      OpKind::kBatchNorm, OpKind::kRelu,    OpKind::kSwish,
                                      OpKind::kSigmoid,   OpKind::kTanh,    OpKind::kMaxPool,
                                      OpKind::kAvgPool,   OpKind::kIdentity, OpKind::kLinear};
  const OpKind kind = kKinds[rng.below(std::size(kKinds))];
  const int stride = stride_for(in.height, target.height);
  const bool spatial_ok = stride > 0 && stride_for(in.width, target.width) == stride;
  const bool same_spatial = in.height == target.height && in.width == target.width;
  switch (kind) {
    case OpKind::kConv2d: {
      static constexpr int kKernels[] = {1, 3, 5};
      const int k = kKernels[rng.below(3)];
      if (last) {
        if (!spatial_ok) return std::nullopt;
        return make_conv(in, target.channels, k, stride);
      }
      const int ch = rng.bernoulli(0.5) ? target.channels : in.channels;
      return make_conv(in, ch, k);
    }
    case OpKind::kDepthwiseConv2d:
      if (last) {
        if (!spatial_ok || in.channels != target.channels) return std::nullopt;
        return make_depthwise(in, 3, stride);
      }
      return make_depthwise(in, 3);
    case OpKind::kMaxPool:
    case OpKind::kAvgPool:
      if (last) {
        if (!spatial_ok || in.channels != target.channels) return std::nullopt;
        return make_pool(kind, in, stride);
      }
      return make_pool(kind, in);
    case OpKind::kLinear:
      if (in.height != 1 || in.width != 1 || target.height != 1 || target.width != 1) return std::nullopt;
      return make_linear(in.channels, last ? target.channels : (rng.bernoulli(0.5) ? target.channels : in.channels));
    default:
      if (last && (!same_spatial || in.channels != target.channels)) return std::nullopt;
      return make_unary(kind, in);
  }
}

std::optional<ComputeGraph> try_mutate(const ComputeGraph& cg, Rng& rng) {
  const auto chain = sample_chain(cg, rng);
  if (chain.empty()) return std::nullopt;
  const int pred = cg.predecessors(chain.front())[0];
  const int succ = cg.successors(chain.back())[0];
  const TensorShape in = cg.nodes()[static_cast<std::size_t>(pred)].output_shape;
  const TensorShape target = cg.nodes()[static_cast<std::size_t>(chain.back())].output_shape;

  const int len = rng.range(1, 3);
  std::vector<NodeAttrs> fresh;
  TensorShape cur = in;
  for (int i = 0; i < len; ++i) {
    auto op = sample_op(cur, target, i + 1 == len, rng);
    if (!op) return std::nullopt;
    cur = op->output_shape;
    fresh.push_back(std::move(*op));
  }

  const std::set<int> removed(chain.begin(), chain.end());
  std::vector<int> remap(cg.size(), -1);
  std::vector<NodeAttrs> nodes;
  for (std::size_t i = 0; i < cg.size(); ++i) {
    if (removed.count(static_cast<int>(i))) continue;
    remap[i] = static_cast<int>(nodes.size());
    nodes.push_back(cg.nodes()[i]);
  }
  std::vector<Edge> edges;
  for (const auto& [s, d] : cg.edges()) {
    if (removed.count(s) || removed.count(d)) continue;
    edges.emplace_back(remap[static_cast<std::size_t>(s)], remap[static_cast<std::size_t>(d)]);
  }
  int prev = remap[static_cast<std::size_t>(pred)];
  for (auto& n : fresh) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(std::move(n));
    edges.emplace_back(prev, id);
    prev = id;
  }
  edges.emplace_back(prev, remap[static_cast<std::size_t>(succ)]);
  try {
    return build_graph(std::move(nodes), std::move(edges), cg.name());
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool better(const Candidate& a, const Candidate& b) {
  if (a.predicted != b.predicted) return a.predicted > b.predicted;
  return a.flops < b.flops;
}

}  // namespace

ComputeGraph mutate(const ComputeGraph& cg, Rng& rng) {
  for (int attempt = 0; attempt < kMutationAttempts; ++attempt) {
    if (auto g = try_mutate(cg, rng)) return std::move(*g);
  }
  return cg;
}

SearchResult local_search(const ComputeGraph& seed, const Scorer& predictor, const SearchConfig& config) {
  if (config.iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (config.top_k < 1) throw std::invalid_argument("top_k must be at least 1");
  if (config.mutations_per_parent < 0) throw std::invalid_argument("mutations_per_parent must be non-negative");
  const auto within_budget = [&](double flops) { return !config.flops_budget || flops <= *config.flops_budget; };

  SearchResult result;
  Candidate first{seed, predictor(seed), compute_flops(seed)};
  if (!within_budget(first.flops)) {
    throw EmptyFrontier("seed graph needs " + std::to_string(first.flops) + " GFLOPs, budget is " +
                        std::to_string(*config.flops_budget));
  }
  result.trajectory.push_back({0, seed.name(), first.predicted, first.flops, true});
  result.frontier.push_back(std::move(first));

  std::unordered_set<std::string> seen{serialize(seed.renamed(""))};
  for (int iter = 1; iter <= config.iterations; ++iter) {
    std::vector<Candidate> pool = result.frontier;
    std::vector<std::size_t> log_index(pool.size(), SIZE_MAX);
    int counter = 0;
    for (std::size_t p = 0; p < result.frontier.size(); ++p) {
      for (int k = 0; k < config.mutations_per_parent; ++k) {
        Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(iter), p, static_cast<std::uint64_t>(k)}));
        ComputeGraph child = mutate(result.frontier[p].graph, rng);
        if (!seen.insert(serialize(child.renamed(""))).second) continue;
        child = child.renamed(seed.name() + "-i" + std::to_string(iter) + "-c" + std::to_string(counter++));
        Candidate c{child, predictor(child), compute_flops(child)};
        result.trajectory.push_back({iter, child.name(), c.predicted, c.flops, false});
        if (!within_budget(c.flops)) continue;
        log_index.push_back(result.trajectory.size() - 1);
        pool.push_back(std::move(c));
      }
    }
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return better(pool[a], pool[b]); });
    order.resize(std::min(order.size(), static_cast<std::size_t>(config.top_k)));
    std::vector<Candidate> next;
    for (std::size_t i : order) {
      if (log_index[i] != SIZE_MAX) result.trajectory[log_index[i]].kept = true;
      next.push_back(pool[i]);
    }
    result.frontier = std::move(next);
  }
  result.best = result.frontier.front();
  return result;
}

std::string trajectory_jsonl(const std::vector<TrajectoryEntry>& trajectory) {
  std::string out;
  for (const auto& e : trajectory) {
    nlohmann::ordered_json j;
    j["iter"] = e.iter;
    j["name"] = e.name;
    j["score"] = e.score;
    j["flops_g"] = e.flops_g;
    j["kept"] = e.kept;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace gennape

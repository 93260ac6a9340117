// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/families.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "gennape/error.hpp"
#include "gennape/rng.hpp"
#include "gennape/spectral.hpp"

namespace gennape {
namespace {

constexpr std::array<std::string_view, 4> kFamilyNames = {"nb101_like", "hiaml_like", "inception_like",
                                                          "twopath_like"};

// Appends nodes in topological order, so the canonical order of the built
// graph equals insertion order.
class Builder {
 public:
  int add(NodeAttrs node, const std::vector<int>& preds) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(node));
    for (int p : preds) edges_.emplace_back(p, id);
    return id;
  }
  const TensorShape& out(int id) const { return nodes_[static_cast<std::size_t>(id)].output_shape; }
  ComputeGraph build(const std::string& name) { return build_graph(std::move(nodes_), std::move(edges_), name); }

  int input() { return add(make_input(kFamilyInput), {}); }
  int conv_bn_relu(int from, int channels, int kernel, int stride = 1) {
    const int c = add(make_conv(out(from), channels, kernel, stride), {from});
    const int b = add(make_unary(OpKind::kBatchNorm, out(c)), {c});
    return add(make_unary(OpKind::kRelu, out(b)), {b});
  }
  void head(int from) {
    const int g = add(make_global_pool(out(from)), {from});
    const int l = add(make_linear(out(g).channels, kFamilyClasses), {g});
    add(make_output(out(l)), {l});
  }

 private:
  std::vector<NodeAttrs> nodes_;
  std::vector<Edge> edges_;
};

// Shape-preserving single operator for block bodies.
enum class BodyOp { kConv3, kConv1, kConv5, kDepthwise3, kBatchNorm, kRelu, kSwish, kMaxPool, kAvgPool };

int add_body_op(Builder& b, BodyOp op, int from, int channels) {
  const TensorShape in = b.out(from);
  switch (op) {
    case BodyOp::kConv3: return b.add(make_conv(in, channels, 3), {from});
    case BodyOp::kConv1: return b.add(make_conv(in, channels, 1), {from});
    case BodyOp::kConv5: return b.add(make_conv(in, channels, 5), {from});
    case BodyOp::kDepthwise3: return b.add(make_depthwise(in, 3), {from});
    case BodyOp::kBatchNorm: return b.add(make_unary(OpKind::kBatchNorm, in), {from});
    case BodyOp::kRelu: return b.add(make_unary(OpKind::kRelu, in), {from});
    case BodyOp::kSwish: return b.add(make_unary(OpKind::kSwish, in), {from});
    case BodyOp::kMaxPool: return b.add(make_pool(OpKind::kMaxPool, in), {from});
    case BodyOp::kAvgPool: return b.add(make_pool(OpKind::kAvgPool, in), {from});
  }
  return from;
}

// ---------------------------------------------------------------------------
// nb101_like: one cell (projection + DAG of up to 5 op vertices + concat of
// sinks) stacked 3 times with max-pool downsampling between stacks.

struct Nb101Cell {
  std::vector<int> ops;                  // 0 = conv3x3 triple, 1 = conv1x1 triple, 2 = max-pool
  std::vector<std::vector<int>> inputs;  // per vertex; -1 is the cell input
};

Nb101Cell sample_nb101_cell(Rng& rng) {
  Nb101Cell cell;
  const int k = rng.range(1, 5);
  for (int v = 0; v < k; ++v) {
    cell.ops.push_back(static_cast<int>(rng.below(3)));
    std::vector<int> in;
    for (int u = -1; u < v; ++u) {
      if (rng.bernoulli(0.4)) in.push_back(u);
    }
    if (in.empty()) in.push_back(v - 1);
    cell.inputs.push_back(in);
  }
  return cell;
}

int build_nb101_cell(Builder& b, const Nb101Cell& cell, int from, int channels) {
  const int entry = b.conv_bn_relu(from, channels, 1);
  std::vector<int> out_ids;
  std::vector<bool> has_succ(cell.ops.size(), false);
  for (std::size_t v = 0; v < cell.ops.size(); ++v) {
    std::vector<int> srcs;
    for (int u : cell.inputs[v]) {
      srcs.push_back(u < 0 ? entry : out_ids[static_cast<std::size_t>(u)]);
      if (u >= 0) has_succ[static_cast<std::size_t>(u)] = true;
    }
    int src = srcs[0];
    if (srcs.size() > 1) src = b.add(make_merge(OpKind::kAdd, b.out(entry)), srcs);
    int o;
    switch (cell.ops[v]) {
      case 0: o = b.conv_bn_relu(src, channels, 3); break;
      case 1: o = b.conv_bn_relu(src, channels, 1); break;
      default: o = b.add(make_pool(OpKind::kMaxPool, b.out(src)), {src}); break;
    }
    out_ids.push_back(o);
  }
  std::vector<int> sinks;
  for (std::size_t v = 0; v < out_ids.size(); ++v) {
    if (!has_succ[v]) sinks.push_back(out_ids[v]);
  }
  const TensorShape s = b.out(entry);
  return b.add(make_concat({s.height, s.width, s.channels * static_cast<int>(sinks.size())}), sinks);
}

ComputeGraph sample_nb101(Rng& rng, const std::string& name) {
  const Nb101Cell cell = sample_nb101_cell(rng);
  Builder b;
  int x = b.conv_bn_relu(b.input(), 16, 3);
  const int widths[3] = {16, 32, 64};
  for (int s = 0; s < 3; ++s) {
    if (s > 0) x = b.add(make_pool(OpKind::kMaxPool, b.out(x), 2), {x});
    x = build_nb101_cell(b, cell, x, widths[s]);
  }
  b.head(x);
  return b.build(name);
}

// ---------------------------------------------------------------------------
// hiaml_like: 4 stages x 2 identical residual blocks drawn from a fixed
// library of 14 templates with at most 4 operators each.

struct BlockTemplate {
  std::vector<BodyOp> ops;
  std::vector<std::vector<int>> inputs;  // -1 is the block input
};

constexpr int kHiamlTemplates = 14;
constexpr std::uint64_t kHiamlLibrarySeed = 0x6869616d6c;

BlockTemplate sample_template(Rng& rng) {
  static constexpr BodyOp kOps[] = {BodyOp::kConv3,     BodyOp::kConv1, BodyOp::kDepthwise3, BodyOp::kBatchNorm,
                                    BodyOp::kRelu,      BodyOp::kSwish, BodyOp::kMaxPool,    BodyOp::kAvgPool};
  BlockTemplate t;
  const int k = rng.range(1, 4);
  for (int v = 0; v < k; ++v) {
    // First operator is always a convolution so every block has weights.
    t.ops.push_back(v == 0 ? (rng.bernoulli(0.5) ? BodyOp::kConv3 : BodyOp::kConv1)
                           : kOps[rng.below(std::size(kOps))]);
    std::vector<int> in{v - 1};
    if (v > 0 && rng.bernoulli(0.3)) {
      const int extra = static_cast<int>(rng.below(static_cast<std::uint64_t>(v))) - 1;
      if (extra != v - 1) in.push_back(extra);
    }
    std::sort(in.begin(), in.end());
    t.inputs.push_back(in);
  }
  return t;
}

const std::vector<BlockTemplate>& hiaml_library() {
  static const std::vector<BlockTemplate> lib = [] {
    std::vector<BlockTemplate> out;
    std::set<std::string> seen;
    Rng rng(kHiamlLibrarySeed);
    while (out.size() < kHiamlTemplates) {
      BlockTemplate t = sample_template(rng);
      std::ostringstream key;
      for (std::size_t v = 0; v < t.ops.size(); ++v) {
        key << static_cast<int>(t.ops[v]) << ':';
        for (int u : t.inputs[v]) key << u << ',';
        key << ';';
      }
      if (seen.insert(key.str()).second) out.push_back(std::move(t));
    }
    return out;
  }();
  return lib;
}

int build_residual_block(Builder& b, const BlockTemplate& t, int entry) {
  const TensorShape s = b.out(entry);
  std::vector<int> ids;
  std::vector<bool> has_succ(t.ops.size(), false);
  for (std::size_t v = 0; v < t.ops.size(); ++v) {
    std::vector<int> srcs;
    for (int u : t.inputs[v]) {
      srcs.push_back(u < 0 ? entry : ids[static_cast<std::size_t>(u)]);
      if (u >= 0) has_succ[static_cast<std::size_t>(u)] = true;
    }
    int src = srcs[0];
    if (srcs.size() > 1) src = b.add(make_merge(OpKind::kMean, s), srcs);
    ids.push_back(add_body_op(b, t.ops[v], src, s.channels));
  }
  std::vector<int> sinks;
  for (std::size_t v = 0; v < ids.size(); ++v) {
    if (!has_succ[v]) sinks.push_back(ids[v]);
  }
  int exit = sinks[0];
  if (sinks.size() > 1) exit = b.add(make_merge(OpKind::kMean, s), sinks);
  return b.add(make_merge(OpKind::kAdd, s), {entry, exit});
}

ComputeGraph sample_hiaml(Rng& rng, const std::string& name) {
  const auto& lib = hiaml_library();
  Builder b;
  int x = b.conv_bn_relu(b.input(), 16, 3);
  int width = 16;
  for (int s = 0; s < 4; ++s) {
    if (s > 0) {
      width *= 2;
      x = b.conv_bn_relu(x, width, 3, 2);
    }
    const BlockTemplate& t = lib[rng.below(lib.size())];
    x = build_residual_block(b, t, x);
    x = build_residual_block(b, t, x);
  }
  b.head(x);
  return b.build(name);
}

// ---------------------------------------------------------------------------
// inception_like: 3 stages of 2-4 identical multi-path blocks. Each block has
// up to 4 paths of up to 4 operators (at least one Conv op, at most one Supp
// op) joined by concat; channels split by floor division, remainder to path 0.

using PathSpec = std::vector<BodyOp>;

PathSpec sample_path(Rng& rng) {
  static constexpr BodyOp kConvOps[] = {BodyOp::kConv1, BodyOp::kConv3, BodyOp::kConv5, BodyOp::kDepthwise3};
  static constexpr BodyOp kSuppOps[] = {BodyOp::kMaxPool, BodyOp::kAvgPool};
  const int len = rng.range(1, 4);
  const bool supp = len > 1 && rng.bernoulli(0.5);
  const int supp_at = supp ? static_cast<int>(rng.below(static_cast<std::uint64_t>(len))) : -1;
  PathSpec p;
  for (int i = 0; i < len; ++i) {
    p.push_back(i == supp_at ? kSuppOps[rng.below(2)] : kConvOps[rng.below(4)]);
  }
  // The channel split is applied by the first regular convolution; make sure one exists.
  if (std::none_of(p.begin(), p.end(), [](BodyOp o) { return o != BodyOp::kDepthwise3 && o != BodyOp::kMaxPool && o != BodyOp::kAvgPool; })) {
    for (auto& o : p) {
      if (o == BodyOp::kDepthwise3) {
        o = BodyOp::kConv1;
        break;
      }
    }
    if (std::none_of(p.begin(), p.end(), [](BodyOp o) { return o == BodyOp::kConv1; })) p.back() = BodyOp::kConv1;
  }
  return p;
}

int build_multipath_block(Builder& b, const std::vector<PathSpec>& paths, int entry) {
  const TensorShape s = b.out(entry);
  const int n = static_cast<int>(paths.size());
  std::vector<int> ends;
  for (int p = 0; p < n; ++p) {
    const int share = s.channels / n + (p == 0 ? s.channels % n : 0);
    int x = entry;
    for (BodyOp op : paths[static_cast<std::size_t>(p)]) x = add_body_op(b, op, x, share);
    ends.push_back(x);
  }
  return b.add(make_concat(s), ends);
}

ComputeGraph sample_inception(Rng& rng, const std::string& name) {
  Builder b;
  int x = b.conv_bn_relu(b.input(), 16, 3);
  int width = 16;
  for (int s = 0; s < 3; ++s) {
    if (s > 0) {
      width *= 2;
      x = b.conv_bn_relu(x, width, 3, 2);
    }
    std::vector<PathSpec> paths(static_cast<std::size_t>(rng.range(1, 4)));
    for (auto& p : paths) p = sample_path(rng);
    const int repeats = rng.range(2, 4);
    for (int r = 0; r < repeats; ++r) x = build_multipath_block(b, paths, x);
  }
  b.head(x);
  return b.build(name);
}

// ---------------------------------------------------------------------------
// twopath_like: stem, two parallel paths of 2-4 blocks (1-3 operators each),
// concat merge, 1x1 fusion.

ComputeGraph sample_twopath(Rng& rng, const std::string& name) {
  static constexpr BodyOp kOps[] = {BodyOp::kConv3, BodyOp::kConv1,     BodyOp::kConv5, BodyOp::kDepthwise3,
                                    BodyOp::kBatchNorm, BodyOp::kRelu, BodyOp::kSwish, BodyOp::kMaxPool,
                                    BodyOp::kAvgPool};
  static constexpr int kWidths[] = {16, 24, 32, 48};
  Builder b;
  const int stem = b.conv_bn_relu(b.input(), 16, 3);
  std::vector<int> ends;
  for (int p = 0; p < 2; ++p) {
    const int width = kWidths[rng.below(4)];
    int x = stem;
    const int blocks = rng.range(2, 4);
    for (int k = 0; k < blocks; ++k) {
      const int ops = rng.range(1, 3);
      for (int o = 0; o < ops; ++o) {
        // Each block opens with a convolution at the path width.
        const BodyOp op = o == 0 ? (rng.bernoulli(0.5) ? BodyOp::kConv3 : BodyOp::kConv1) : kOps[rng.below(std::size(kOps))];
        x = add_body_op(b, op, x, width);
      }
    }
    ends.push_back(x);
  }
  const TensorShape s0 = b.out(ends[0]);
  const int merged = b.add(make_concat({s0.height, s0.width, s0.channels + b.out(ends[1]).channels}), ends);
  const int fused = b.conv_bn_relu(merged, 64, 1);
  b.head(fused);
  return b.build(name);
}

bool is_shape_reducing(const NodeAttrs& n) {
  return n.output_shape.height < n.input_shape.height || n.output_shape.width < n.input_shape.width;
}

}  // namespace

std::string_view family_name(FamilyKind kind) { return kFamilyNames[static_cast<std::size_t>(kind)]; }

std::optional<FamilyKind> family_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == name) return static_cast<FamilyKind>(i);
  }
  return std::nullopt;
}

ComputeGraph sample_graph(FamilyKind kind, std::uint64_t seed, const std::string& name) {
  Rng rng(seed);
  switch (kind) {
    case FamilyKind::kNb101Like: return sample_nb101(rng, name);
    case FamilyKind::kHiamlLike: return sample_hiaml(rng, name);
    case FamilyKind::kInceptionLike: return sample_inception(rng, name);
    case FamilyKind::kTwopathLike: return sample_twopath(rng, name);
  }
  throw std::invalid_argument("unknown family");
}

std::vector<ComputeGraph> generate(FamilyKind kind, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("n must be at least 1");
  std::vector<ComputeGraph> out;
  std::unordered_set<std::string> seen;
  const std::size_t limit = 100 * n;
  for (std::size_t draw = 0; out.size() < n; ++draw) {
    if (draw >= limit) {
      throw GenerationExhausted(std::string(family_name(kind)) + ": only " + std::to_string(out.size()) +
                                " unique graphs after " + std::to_string(limit) + " draws");
    }
    ComputeGraph g = sample_graph(kind, derive_seed(seed, {static_cast<std::uint64_t>(kind), draw}), "");
    if (!seen.insert(serialize(g)).second) continue;
    char idx[16];
    std::snprintf(idx, sizeof idx, "%05zu", out.size());
    out.push_back(g.renamed(std::string(family_name(kind)) + "-" + idx));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural views

std::vector<int> downsampling_nodes(const ComputeGraph& cg) {
  std::vector<int> out;
  for (std::size_t i = 0; i < cg.size(); ++i) {
    if (is_shape_reducing(cg.nodes()[i]) && cg.nodes()[i].kind != OpKind::kGlobalAvgPool) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

std::vector<StageView> stage_blocks(const ComputeGraph& cg, OpKind terminal) {
  const auto& nodes = cg.nodes();
  const int n = static_cast<int>(cg.size());
  int head = n;
  for (int i = 0; i < n; ++i) {
    if (nodes[static_cast<std::size_t>(i)].kind == OpKind::kGlobalAvgPool) {
      head = i;
      break;
    }
  }
  std::vector<int> starts{0};
  for (int d : downsampling_nodes(cg)) starts.push_back(d);
  std::vector<StageView> stages;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const int end = s + 1 < starts.size() ? starts[s + 1] : head;
    int i = starts[s];
    const auto kind_at = [&](int k) { return k < end ? nodes[static_cast<std::size_t>(k)].kind : OpKind::kOutput; };
    // Stage prelude: stem (input, conv) or the downsampling node, then bn and relu.
    if (s == 0) {
      if (kind_at(i) == OpKind::kInput) ++i;
      if (kind_at(i) == OpKind::kConv2d) ++i;
    } else {
      ++i;
    }
    if (kind_at(i) == OpKind::kBatchNorm) ++i;
    if (kind_at(i) == OpKind::kRelu) ++i;
    StageView view;
    std::vector<int> current;
    for (; i < end; ++i) {
      current.push_back(i);
      if (nodes[static_cast<std::size_t>(i)].kind == terminal) {
        view.blocks.push_back(std::move(current));
        current.clear();
      }
    }
    if (!current.empty()) view.blocks.push_back(std::move(current));  // unterminated tail
    stages.push_back(std::move(view));
  }
  return stages;
}

std::string block_signature(const ComputeGraph& cg, const std::vector<int>& block) {
  std::ostringstream os;
  if (block.empty()) return {};
  const int first = block.front();
  const auto inside = [&](int v) { return std::find(block.begin(), block.end(), v) != block.end(); };
  for (int v : block) {
    const auto& nd = cg.nodes()[static_cast<std::size_t>(v)];
    os << op_kind_name(nd.kind) << '(' << nd.input_shape.height << 'x' << nd.input_shape.width << 'x'
       << nd.input_shape.channels << "->" << nd.output_shape.channels << ')';
    if (nd.weight_shape) {
      os << 'w';
      for (int d : *nd.weight_shape) os << d << ',';
    }
    os << '<';
    for (int p : cg.predecessors(v)) {
      if (inside(p)) {
        os << (p - first) << ',';
      } else {
        os << "x,";
      }
    }
    os << ">;";
  }
  return os.str();
}

std::vector<std::vector<int>> block_paths(const ComputeGraph& cg, const std::vector<int>& block) {
  std::vector<std::vector<int>> paths;
  if (block.empty()) return paths;
  const auto inside = [&](int v) { return std::find(block.begin(), block.end(), v) != block.end(); };
  for (int end : cg.predecessors(block.back())) {
    std::vector<int> path;
    int v = end;
    while (inside(v)) {
      path.push_back(v);
      const auto& preds = cg.predecessors(v);
      if (preds.size() != 1) {
        path.clear();  // not a simple chain
        break;
      }
      v = preds[0];
    }
    std::reverse(path.begin(), path.end());
    paths.push_back(std::move(path));
  }
  return paths;
}

bool is_conv_op(OpKind kind) { return kind == OpKind::kConv2d || kind == OpKind::kDepthwiseConv2d; }
bool is_supp_op(OpKind kind) { return kind == OpKind::kMaxPool || kind == OpKind::kAvgPool; }

bool is_nb101_like(const ComputeGraph& cg) {
  const auto& nodes = cg.nodes();
  const auto down = downsampling_nodes(cg);
  if (down.size() != 2) return false;
  for (int d : down) {
    if (nodes[static_cast<std::size_t>(d)].kind != OpKind::kMaxPool) return false;
  }
  // Conv-BN-ReLU ordering with 1x1 or 3x3 kernels.
  for (std::size_t i = 0; i < cg.size(); ++i) {
    if (nodes[i].kind != OpKind::kConv2d) continue;
    const int k = (*nodes[i].weight_shape)[2];
    if (k != 1 && k != 3) return false;
    const auto& s1 = cg.successors(static_cast<int>(i));
    if (s1.size() != 1 || nodes[static_cast<std::size_t>(s1[0])].kind != OpKind::kBatchNorm) return false;
    const auto& s2 = cg.successors(s1[0]);
    if (s2.size() != 1 || nodes[static_cast<std::size_t>(s2[0])].kind != OpKind::kRelu) return false;
  }
  const auto stages = stage_blocks(cg, OpKind::kConcat);
  if (stages.size() != 3) return false;
  for (const auto& st : stages) {
    if (st.blocks.size() != 1 || nodes[static_cast<std::size_t>(st.blocks[0].back())].kind != OpKind::kConcat) {
      return false;
    }
    // Op vertices: conv triples count once (via their conv), pools once; the
    // first conv is the input projection.
    int vertices = -1;
    for (int v : st.blocks[0]) {
      const OpKind k = nodes[static_cast<std::size_t>(v)].kind;
      if (k == OpKind::kConv2d || k == OpKind::kMaxPool) ++vertices;
    }
    if (vertices < 1 || vertices > 5) return false;
  }
  return true;
}

bool is_hiaml_like(const ComputeGraph& cg) {
  const auto stages = stage_blocks(cg, OpKind::kAdd);
  if (stages.size() != 4) return false;
  for (const auto& st : stages) {
    if (st.blocks.size() != 2) return false;
    for (const auto& blk : st.blocks) {
      const auto& last = cg.nodes()[static_cast<std::size_t>(blk.back())];
      if (last.kind != OpKind::kAdd || cg.predecessors(blk.back()).size() != 2) return false;
      int ops = 0;
      for (int v : blk) {
        if (!is_merge(cg.nodes()[static_cast<std::size_t>(v)].kind)) ++ops;
      }
      if (ops < 1 || ops > 4) return false;
    }
    if (block_signature(cg, st.blocks[0]) != block_signature(cg, st.blocks[1])) return false;
  }
  return true;
}

bool is_inception_like(const ComputeGraph& cg) {
  const auto stages = stage_blocks(cg, OpKind::kConcat);
  if (stages.size() != 3) return false;
  for (const auto& st : stages) {
    if (st.blocks.size() < 2 || st.blocks.size() > 4) return false;
    const std::string sig = block_signature(cg, st.blocks[0]);
    for (const auto& blk : st.blocks) {
      if (cg.nodes()[static_cast<std::size_t>(blk.back())].kind != OpKind::kConcat) return false;
      if (block_signature(cg, blk) != sig) return false;
      const auto paths = block_paths(cg, blk);
      if (paths.empty() || paths.size() > 4) return false;
      std::size_t covered = 1;
      for (const auto& p : paths) {
        if (p.empty() || p.size() > 4) return false;
        int conv = 0, supp = 0;
        for (int v : p) {
          const OpKind k = cg.nodes()[static_cast<std::size_t>(v)].kind;
          if (is_conv_op(k)) {
            ++conv;
          } else if (is_supp_op(k)) {
            ++supp;
          } else {
            return false;
          }
        }
        if (conv < 1 || supp > 1) return false;
        covered += p.size();
      }
      if (covered != blk.size()) return false;
    }
  }
  return true;
}

std::vector<int> twopath_lengths(const ComputeGraph& cg) {
  int fork = -1;
  for (std::size_t i = 0; i < cg.size(); ++i) {
    if (cg.successors(static_cast<int>(i)).size() > 1) {
      if (fork >= 0) return {};
      fork = static_cast<int>(i);
    }
  }
  if (fork < 0 || cg.successors(fork).size() != 2) return {};
  std::vector<int> lengths;
  int merge = -1;
  for (int v : cg.successors(fork)) {
    int len = 0;
    while (cg.predecessors(v).size() == 1 && cg.successors(v).size() == 1) {
      ++len;
      v = cg.successors(v)[0];
    }
    if (cg.predecessors(v).size() != 2) return {};
    if (merge >= 0 && v != merge) return {};
    merge = v;
    lengths.push_back(len);
  }
  return lengths;
}

bool is_twopath_like(const ComputeGraph& cg) {
  const auto lengths = twopath_lengths(cg);
  if (lengths.size() != 2) return false;
  for (int l : lengths) {
    if (l < 2 || l > 12) return false;
  }
  return downsampling_nodes(cg).empty();
}

bool matches_family(FamilyKind kind, const ComputeGraph& cg) {
  switch (kind) {
    case FamilyKind::kNb101Like: return is_nb101_like(cg);
    case FamilyKind::kHiamlLike: return is_hiaml_like(cg);
    case FamilyKind::kInceptionLike: return is_inception_like(cg);
    case FamilyKind::kTwopathLike: return is_twopath_like(cg);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Oracle

OracleFeatures oracle_features(const ComputeGraph& cg) {
  OracleFeatures f;
  f.depth = graph_depth(cg);
  f.log_flops = std::log10(std::max(compute_flops(cg), 1e-9));
  const auto sig = signature(cg, 2);
  f.lambda2 = sig.eigenvalues.size() > 1 ? sig.eigenvalues[1] : 0.0;
  for (const auto& n : cg.nodes()) f.op_fraction[static_cast<std::size_t>(n.kind)] += 1.0;
  for (double& v : f.op_fraction) v /= static_cast<double>(cg.size());
  return f;
}

double oracle_accuracy(const ComputeGraph& cg, const OracleConfig& o) {
  const OracleFeatures f = oracle_features(cg);
  double s = o.bias + o.w_depth * (f.depth - o.depth_center) / o.depth_scale +
             o.w_log_flops * (f.log_flops - o.log_flops_center) + o.w_lambda2 * f.lambda2;
  for (std::size_t k = 0; k < kNumOpKinds; ++k) s += o.w_ops[k] * f.op_fraction[k];
  if (o.noise_std > 0) {
    Rng rng(derive_seed(o.seed, {fnv1a(serialize(cg.renamed("")))}));
    s += o.noise_std * rng.normal();
  }
  return o.lo + (o.hi - o.lo) / (1.0 + std::exp(-s));
}

OracleConfig default_oracle(FamilyKind kind, std::uint64_t seed) {
  OracleConfig o;
  o.seed = seed;
  o.w_depth = 0.6;
  o.w_log_flops = 1.2;
  o.w_lambda2 = 8.0;
  o.w_ops[static_cast<std::size_t>(OpKind::kConv2d)] = 3.0;
  o.w_ops[static_cast<std::size_t>(OpKind::kDepthwiseConv2d)] = 1.0;
  o.w_ops[static_cast<std::size_t>(OpKind::kMaxPool)] = -3.0;
  o.w_ops[static_cast<std::size_t>(OpKind::kAvgPool)] = -2.0;
  o.w_ops[static_cast<std::size_t>(OpKind::kRelu)] = 1.0;
  o.noise_std = 0.1;
  switch (kind) {
    case FamilyKind::kNb101Like: o.lo = 0.80, o.hi = 0.9409; break;
    case FamilyKind::kHiamlLike: o.lo = 0.9111, o.hi = 0.9344; break;
    case FamilyKind::kInceptionLike: o.lo = 0.85, o.hi = 0.95; break;
    case FamilyKind::kTwopathLike: o.lo = 0.80, o.hi = 0.92; break;
  }
  return o;
}

std::vector<DatasetRecord> build_dataset(FamilyKind kind, std::size_t n, const OracleConfig& oracle,
                                         std::uint64_t seed) {
  if (!(oracle.lo < oracle.hi) || oracle.lo < 0 || oracle.hi > 1) {
    throw std::invalid_argument("oracle range must satisfy 0 <= lo < hi <= 1");
  }
  std::vector<DatasetRecord> out;
  for (auto& g : generate(kind, n, seed)) {
    const double acc = oracle_accuracy(g, oracle);
    const double flops = compute_flops(g);
    out.push_back({std::move(g), acc, flops});
  }
  return out;
}

std::string oracle_json(const OracleConfig& o) {
  nlohmann::ordered_json j;
  j["bias"] = o.bias;
  j["w_depth"] = o.w_depth;
  j["w_log_flops"] = o.w_log_flops;
  j["w_lambda2"] = o.w_lambda2;
  nlohmann::ordered_json ops = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < kNumOpKinds; ++k) {
    if (o.w_ops[k] != 0.0) ops[std::string(op_kind_name(static_cast<OpKind>(k)))] = o.w_ops[k];
  }
  j["w_ops"] = ops;
  j["noise_std"] = o.noise_std;
  j["lo"] = o.lo;
  j["hi"] = o.hi;
  j["seed"] = o.seed;
  j["depth_center"] = o.depth_center;
  j["depth_scale"] = o.depth_scale;
  j["log_flops_center"] = o.log_flops_center;
  return j.dump();
}

OracleConfig oracle_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte > 0 ? e.byte - 1 : 0, e.what());
  }
  OracleConfig o;
  try {
    o.bias = j.value("bias", 0.0);
    o.w_depth = j.value("w_depth", 0.0);
    o.w_log_flops = j.value("w_log_flops", 0.0);
    o.w_lambda2 = j.value("w_lambda2", 0.0);
    if (j.contains("w_ops")) {
      for (const auto& [name, w] : j.at("w_ops").items()) {
        const auto kind = op_kind_from_name(name);
        if (!kind) throw ParseError(0, "unknown op kind '" + name + "' in oracle weights");
        o.w_ops[static_cast<std::size_t>(*kind)] = w.get<double>();
      }
    }
    o.noise_std = j.value("noise_std", 0.0);
    o.lo = j.value("lo", o.lo);
    o.hi = j.value("hi", o.hi);
    o.seed = j.value("seed", std::uint64_t{0});
    o.depth_center = j.value("depth_center", o.depth_center);
    o.depth_scale = j.value("depth_scale", o.depth_scale);
    o.log_flops_center = j.value("log_flops_center", o.log_flops_center);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, e.what());
  }
  return o;
}

std::string dataset_manifest_json(FamilyKind kind, std::size_t n, std::uint64_t seed, const OracleConfig& oracle) {
  nlohmann::ordered_json j;
  j["kind"] = family_name(kind);
  j["n"] = n;
  j["seed"] = seed;
  j["oracle"] = nlohmann::ordered_json::parse(oracle_json(oracle));
  return j.dump(2);
}

}  // namespace gennape

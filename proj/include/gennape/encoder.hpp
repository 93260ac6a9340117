// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gennape/autodiff.hpp"
#include "gennape/compute_graph.hpp"
#include "gennape/nn.hpp"
#include "gennape/spectral.hpp"
#include "gennape/tensor_io.hpp"

namespace gennape {

struct EncoderConfig {
  int embed_dim = 128;  // concat of the two branches
  int branch_dim = 64;
  int proj_dim = 32;
  int gnn_layers = 4;
  int attn_heads = 2;
  double dropout_rate = 0.1;
  double temperature = 0.05;
  int batch_size = 128;
  int q = kSignatureLength;
  int alpha_sign = +1;
  double aux_flops_weight = 1.0;
  double learning_rate = 1e-4;
  int epochs = 10;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// Graph-level encoder output.
struct Embedding {
  Vector h;
};

/// Unit-norm projection used by the contrastive loss.
struct Projection {
  Vector z;
};

/// one-hot kind (17) | log1p of input and output h,w,c (6) | log1p weight count | bias flag
inline constexpr int kNodeFeatureDim = static_cast<int>(kNumOpKinds) + 8;

Matrix node_features(const ComputeGraph& cg);

/// Per-graph constant inputs of the encoder forward pass.
struct GraphInputs {
  Matrix features;   // n x kNodeFeatureDim
  Matrix pred_mean;  // row i averages over predecessors of i
  Matrix succ_mean;  // row i averages over successors of i
};
GraphInputs graph_inputs(const ComputeGraph& cg);

/// Trainable encoder state plus the configuration it was built for.
struct EncoderParams {
  EncoderConfig config;
  ParamSet params;

  // Parameter indices.
  std::size_t embed_w = 0, embed_b = 0;
  struct GnnLayer {
    std::size_t self_w, pred_w, succ_w, bias;
  };
  std::vector<GnnLayer> gnn;
  std::size_t wq = 0, wk = 0, wv = 0, wo = 0, bo = 0;
  Mlp ffn;
  Mlp proj;
  Mlp aux;

  /// Seeded initialization from config.seed.
  static EncoderParams init(const EncoderConfig& config);

  /// Parameter indices belonging to the FLOPs auxiliary head.
  std::vector<std::size_t> aux_indices() const;
};

/// Forward pass on a tape. `vars` are bound from `p.params` (variables when
/// training, constants otherwise). Returns a 1 x embed_dim node. A dropout
/// seed enables dropout; nullopt is inference mode.
ad::Var encode_on_tape(ad::Tape& t, const std::vector<ad::Var>& vars, const EncoderParams& p,
                       const GraphInputs& in, std::optional<std::uint64_t> dropout_seed);

Embedding encode(const ComputeGraph& cg, const EncoderParams& p,
                 std::optional<std::uint64_t> dropout_seed = std::nullopt);
std::vector<Embedding> encode_all(std::span<const ComputeGraph> graphs, const EncoderParams& p);

Projection project(const Embedding& h, const EncoderParams& p);
/// z_i . z_j / tau
double similarity(const Projection& a, const Projection& b, double tau);

/// Contrastive loss over 2N unit projections (rows of z) with per-row convex
/// pair weights (rows of alpha, zero diagonal), and its gradient w.r.t. z.
struct ClLoss {
  double loss = 0.0;
  Matrix grad;
};
ClLoss cl_loss(const Matrix& z, const Matrix& alpha, double tau);
ad::Var cl_loss(ad::Tape& t, ad::Var z, const Matrix& alpha, double tau);

/// Stacked alpha_weights rows for a batch of signatures.
Matrix alpha_matrix(std::span<const SpectralSignature> batch, int sign);

struct EncoderTrainingLog {
  /// Entry 0 is the loss before any update; entry e the mean over epoch e.
  std::vector<double> epoch_loss;
  std::vector<double> epoch_cl;
  std::vector<double> epoch_aux;
  double flops_target_mean = 0.0;
  double flops_target_std = 1.0;
};

struct TrainedEncoder {
  EncoderParams params;
  EncoderTrainingLog log;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Mini-batch training of the contrastive objective plus the FLOPs head.
/// Deterministic given config.seed. Throws NonFiniteLoss.
TrainedEncoder train_encoder(std::span<const ComputeGraph> dataset, const EncoderConfig& config,
                             const ProgressFn& progress = {});

/// Single-batch loss and full parameter gradient; exposed for gradient checks.
struct BatchLoss {
  double loss = 0.0;
  double cl = 0.0;
  double aux = 0.0;
  std::vector<Matrix> grads;
};
BatchLoss encoder_batch_loss(const EncoderParams& p, std::span<const GraphInputs> graphs,
                             std::span<const SpectralSignature> sigs, std::span<const double> flops_targets,
                             std::uint64_t dropout_root, bool with_grad);

void save_encoder(TensorContainer& c, const EncoderParams& p);
EncoderParams load_encoder(const TensorContainer& c);

}  // namespace gennape

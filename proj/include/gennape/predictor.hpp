// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gennape/compute_graph.hpp"
#include "gennape/encoder.hpp"
#include "gennape/fcm.hpp"
#include "gennape/nn.hpp"
#include "gennape/tensor_io.hpp"

namespace gennape {

// ---------------------------------------------------------------------------
// Label transform

/// Z-score statistics of the FLOPs-discounted accuracy on the training family.
/// With use_flops=false the transform reduces to a plain z-score of accuracy.
struct TransformStats {
  double mean = 0.0;
  double stddev = 1.0;
  double prune_threshold = 80.0;  // percent; lower accuracies are excluded from the statistics
  bool use_flops = true;
};

/// raw = A / (log10(F + 1) + 1), or A when use_flops is false. A in percent, F in GFLOPs.
double raw_label(double accuracy_pct, double flops_g, bool use_flops = true);
double transform_label(double accuracy_pct, double flops_g, const TransformStats& stats);
double inverse_transform(double y, double flops_g, const TransformStats& stats);

/// Fits mean/std over samples at or above the prune threshold. Throws
/// InsufficientSamples if none survive and DegenerateVariance if they are constant.
TransformStats fit_transform_stats(std::span<const double> accuracy_pct, std::span<const double> flops_g,
                                   bool use_flops = true, double prune_threshold = 80.0);

// ---------------------------------------------------------------------------
// Shared training configuration

struct TrainConfig {
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 1e-4;  // initial rate
  std::uint64_t seed = 0;
  bool anneal = true;  // cosine decay to zero over the run
};

/// Fine-tuning defaults: 100 epochs at batch size 1.
inline TrainConfig fine_tune_defaults(std::uint64_t seed = 0) { return {100, 1, 1e-4, seed}; }

/// Indices of the fine-tuning subset: a seeded choice of k of n items that
/// depends only on (n, k, seed), so every variant sees the same samples.
std::vector<std::size_t> select_finetune_samples(std::size_t n, std::size_t k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Membership-gated MLP ensemble (CL, CL+T, CL+FCM, CL+FCM+T)

/// C = 1 model over `dim` features: every membership row is (1).
FcmModel single_cluster(int dim);

struct EnsembleModel {
  FcmModel fcm;  // C == heads.size(); C = 1 for the non-FCM variants
  TransformStats stats;
  ParamSet params;
  std::vector<Mlp> heads;
  int input_dim = 0;
  int hidden = 256;
  int hidden_layers = 4;

  /// C heads of `hidden_layers` x `hidden` units over `input_dim` features.
  static EnsembleModel init(FcmModel fcm, TransformStats stats, int input_dim, std::uint64_t seed,
                            int hidden = 256, int hidden_layers = 4);
};

/// Per-head outputs, N x C.
Matrix head_outputs(const EnsembleModel& model, const Matrix& features);
/// y' = sum_j U_j f_j(x) per row, in transformed units.
Vector ensemble_predict(const EnsembleModel& model, const Matrix& features);
/// Same with caller-supplied memberships.
Vector ensemble_predict(const EnsembleModel& model, const Matrix& features, const Matrix& memberships);
/// Predicted accuracy in percent.
Vector ensemble_predict_accuracy(const EnsembleModel& model, const Matrix& features, std::span<const double> flops_g);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<Matrix> grads;
};
/// Mean over rows of (sum_j U_ij f_j(x_i) - y_i)^2.
LossAndGrad ensemble_loss(const EnsembleModel& model, const Matrix& features, const Matrix& memberships,
                          const Vector& targets, bool with_grad);

/// Mini-batch Adam on the membership-weighted squared error; `targets` are
/// already transformed. Throws NonFiniteLoss.
void train_heads(EnsembleModel& model, const Matrix& features, const Vector& targets, const TrainConfig& config);

/// Snapshot fine-tuning on labeled samples; the input model is not modified.
EnsembleModel fine_tune(const EnsembleModel& model, const Matrix& features, const Vector& targets,
                        const TrainConfig& config);

// ---------------------------------------------------------------------------
// Pairwise classifier

struct PairwiseModel {
  FcmModel fcm;  // C = 1 without FCM gating
  ParamSet params;
  std::vector<Mlp> latent_heads;  // input_dim -> hidden -> latent
  std::size_t comparator = 0;     // (2 * latent) x 1
  int input_dim = 0;
  int hidden = 128;
  int latent_dim = 16;

  static PairwiseModel init(FcmModel fcm, int input_dim, std::uint64_t seed, int hidden = 128, int latent = 16);
};

struct PairwiseConfig {
  TrainConfig train;
  std::size_t all_pairs_limit = 256;  // all ordered pairs up to this many samples
  std::size_t pairs_per_sample = 64;  // otherwise this many random pairs per sample per epoch
};

/// Membership-weighted latent vectors, N x latent.
Matrix pairwise_latents(const PairwiseModel& model, const Matrix& features);
/// Antisymmetric logit; positive means row a is predicted more accurate than row b.
double pairwise_score(const PairwiseModel& model, const Vector& a, const Vector& b);
/// Logit for every (a_i, b_i) pair from precomputed latents.
double pairwise_logit(const PairwiseModel& model, const Matrix& latents, std::size_t a, std::size_t b);
/// Per-item scores: position in the ascending mergesort order under the comparator.
std::vector<double> pairwise_rank_scores(const PairwiseModel& model, const Matrix& features);

/// Mean logistic loss over pairs (a_k, b_k) with label 1 when a_k is better.
LossAndGrad pairwise_loss(const PairwiseModel& model, const Matrix& features, const Matrix& memberships,
                          const std::vector<std::pair<std::size_t, std::size_t>>& pairs, bool with_grad);

/// Training pairs for one epoch: all ordered pairs with distinct labels for
/// small sets, seeded random pairs otherwise.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::span<const double> labels,
                                                              const PairwiseConfig& config, std::uint64_t seed);

void train_pairwise(PairwiseModel& model, const Matrix& features, std::span<const double> labels,
                    const PairwiseConfig& config);
PairwiseModel fine_tune(const PairwiseModel& model, const Matrix& features, std::span<const double> labels,
                        const PairwiseConfig& config);

// ---------------------------------------------------------------------------
// Message-passing baseline trained end-to-end on graphs

struct BaselineGnn {
  TransformStats stats;
  ParamSet params;
  std::size_t embed_w = 0, embed_b = 0;
  struct Layer {
    std::size_t self_w, pred_w, succ_w, bias;
  };
  std::vector<Layer> layers;
  Mlp head;
  int node_dim = 32;
  int head_hidden = 32;
  int head_layers = 4;

  static BaselineGnn init(TransformStats stats, std::uint64_t seed, int node_dim = 32, int num_layers = 6,
                          int head_hidden = 32, int head_layers = 4);
};

double baseline_predict(const BaselineGnn& model, const GraphInputs& in);
std::vector<double> baseline_predict(const BaselineGnn& model, std::span<const GraphInputs> graphs);
LossAndGrad baseline_loss(const BaselineGnn& model, std::span<const GraphInputs> graphs, const Vector& targets,
                          bool with_grad);
void train_baseline_gnn(BaselineGnn& model, std::span<const GraphInputs> graphs, const Vector& targets,
                        const TrainConfig& config);
BaselineGnn fine_tune(const BaselineGnn& model, std::span<const GraphInputs> graphs, const Vector& targets,
                      const TrainConfig& config);

// ---------------------------------------------------------------------------
// Combination of constituents

enum class CombineMode { kZeroShot, kFineTuned };

/// Average ranks rescaled to [0, 1]; a single item maps to 0.5.
std::vector<double> rank_normalize(std::span<const double> scores);

/// softmax over Kendall tau values.
std::vector<double> kt_softmax_weights(std::span<const double> taus);

struct CombineResult {
  std::vector<double> scores;
  std::vector<double> weights;
};

/// Rank-normalizes every constituent and takes a convex combination. Zero-shot
/// weights are uniform; fine-tuned weights are the softmax of each
/// constituent's Kendall tau against `ft_labels` on `ft_indices` (a constant
/// constituent counts as tau 0). Throws MismatchedLengths.
CombineResult gennape_combine(const std::vector<std::vector<double>>& constituents, CombineMode mode,
                              std::span<const std::size_t> ft_indices = {}, std::span<const double> ft_labels = {});

// ---------------------------------------------------------------------------
// Persistence

void save_ensemble(TensorContainer& c, const EnsembleModel& m);
EnsembleModel load_ensemble(const TensorContainer& c);
void save_pairwise(TensorContainer& c, const PairwiseModel& m);
PairwiseModel load_pairwise(const TensorContainer& c);
void save_baseline(TensorContainer& c, const BaselineGnn& m);
BaselineGnn load_baseline(const TensorContainer& c);

}  // namespace gennape

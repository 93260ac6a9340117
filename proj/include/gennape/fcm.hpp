// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gennape/encoder.hpp"
#include "gennape/linalg.hpp"
#include "gennape/tensor_io.hpp"

namespace gennape {

/// Principal components kept from the embedding; standardized FLOPs is
/// appended after them, giving 32 features.
inline constexpr int kPcaComponents = 31;
inline constexpr int kFeatureDim = kPcaComponents + 1;

/// Standardization and PCA fitted on the training family and reused verbatim
/// for every other family.
struct FeatureReducer {
  std::vector<double> mean;            // per raw embedding dim
  std::vector<double> stddev;          // per raw embedding dim
  std::vector<int> kept;               // embedding dims with non-degenerate variance
  Matrix basis;                        // kept.size() x components, orthonormal columns
  std::vector<double> eigenvalues;     // descending, one per column of basis
  double flops_mean = 0.0;
  double flops_std = 1.0;
  bool flops_kept = true;

  int output_dim() const { return static_cast<int>(basis.cols()) + (flops_kept ? 1 : 0); }

  /// Standardized kept embedding dims, one row per sample.
  Matrix standardize(const Matrix& embeddings) const;
  /// Rows of reduced features: PCA components scaled to unit variance on the
  /// fitting set, then standardized FLOPs.
  Matrix apply(const Matrix& embeddings, std::span<const double> flops_g) const;
};

/// Fits standardization and PCA. Dimensions with std < 1e-12 are dropped and
/// reported through `warnings`; DegenerateVariance is thrown only when no
/// dimension survives.
FeatureReducer fit_reducer(const Matrix& embeddings, std::span<const double> flops_g,
                           int components = kPcaComponents, std::vector<std::string>* warnings = nullptr);

/// Stack embeddings as rows.
Matrix embedding_matrix(std::span<const Embedding> embeddings);

struct FcmOptions {
  double epsilon = 1e-9;
  int max_iterations = 10000;
};

struct FcmModel {
  int clusters = 1;
  double m = 2.0;
  double epsilon = 1e-9;
  int max_iterations = 10000;
  Matrix centroids;  // clusters x dim
  std::optional<FeatureReducer> reducer;

  // Fit diagnostics.
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective;  // after each alternation step
  bool objective_monotone = true;
};

/// Fuzzy C-Means on the rows of `features`. Throws EmptyInput, InvalidFuzzifier,
/// std::invalid_argument when clusters is outside [1, N].
FcmModel fcm_fit(const Matrix& features, int clusters, double m, std::uint64_t seed, const FcmOptions& options = {});

/// Membership of one point; sums to 1. A point on a centroid gets a hard assignment.
Vector fcm_membership(const Vector& x, const FcmModel& model);
/// Membership rows for every row of `features`.
Matrix fcm_memberships(const Matrix& features, const FcmModel& model);
/// sum_{i,k} U_ik^m ||x_i - v_k||^2
double fcm_objective(const Matrix& features, const Matrix& u, const Matrix& centroids, double m);

struct GridCell {
  int clusters = 0;
  double m = 0.0;
  std::optional<double> score;  // empty when the cell failed
  std::string error;
};

struct GridResult {
  int clusters = 0;
  double m = 0.0;
  FcmModel model;
  std::vector<GridCell> cells;
};

/// Scores a fitted model, typically by training heads and measuring SRCC on a
/// held-out split. Exceptions disqualify the cell.
using GridScorer = std::function<double(const FcmModel&)>;

inline const std::vector<int> kGridClusters = {10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
inline const std::vector<double> kGridFuzzifiers = {2.0, 2.5, 3.0, 3.5, 4.0};

/// Exhaustive grid; highest score wins, ties go to smaller C then smaller m.
/// Throws EmptyInput when every cell fails.
GridResult grid_search(const Matrix& features, std::uint64_t seed, const GridScorer& scorer,
                       const std::vector<int>& clusters = kGridClusters,
                       const std::vector<double>& fuzzifiers = kGridFuzzifiers, const FcmOptions& options = {});

void save_fcm(TensorContainer& c, const FcmModel& model);
FcmModel load_fcm(const TensorContainer& c);

}  // namespace gennape

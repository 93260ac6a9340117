// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used as test oracles. None of these
// share code with the library beyond plain data types.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gennape/compute_graph.hpp"
#include "gennape/linalg.hpp"
#include "gennape/nn.hpp"
#include "gennape/rng.hpp"

namespace gennape::testing {

/// Cyclic Jacobi rotations; eigenvalues ascending.
std::vector<double> jacobi_eigenvalues(Matrix a);

/// Direct evaluation of u_k = 1 / sum_j (d_k / d_j)^(2/(m-1)).
std::vector<double> brute_membership(const Vector& x, const Matrix& centroids, double m);

/// Ranks by counting smaller and equal entries.
std::vector<double> brute_ranks(std::span<const double> v);
double brute_srcc(std::span<const double> a, std::span<const double> b);
/// Tau-b over all ordered pairs (each unordered pair is visited twice).
double brute_kendall(std::span<const double> a, std::span<const double> b);
/// NDCG@k with ties in predictions broken by index.
double brute_ndcg(std::span<const double> preds, std::span<const double> labels, std::size_t k);

/// Result of a central finite-difference comparison.
struct GradCheck {
  int checked = 0;
  int skipped = 0;     // coordinates sitting on a non-smooth point
  double max_rel = 0;  // worst relative error among checked coordinates
};

/// Compares `analytic` against central differences of `loss` for up to
/// `samples` random coordinates of every parameter. A coordinate is skipped
/// when the differences at h and h/2 disagree, which happens only when a ReLU
/// kink lies inside the stencil.
GradCheck check_gradients(ParamSet& params, const std::vector<Matrix>& analytic,
                          const std::function<double()>& loss, int samples, std::uint64_t seed, double h = 1e-4);

/// input -> conv3x3 -> relu -> global pool -> linear -> output (6 nodes).
ComputeGraph small_classifier(const std::string& name = "small");
/// Undirected path on n nodes as a valid compute graph (identity chain).
ComputeGraph chain_graph(int n, const std::string& name = "chain");

/// Same graph with nodes listed in a random topological order.
ComputeGraph permuted(const ComputeGraph& cg, Rng& rng);

/// Fresh scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace gennape::testing

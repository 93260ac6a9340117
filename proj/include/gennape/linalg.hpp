// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

namespace gennape {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values[k]; empty when not requested
};

struct EigenOptions {
  int max_iterations = 10000;
  double off_diagonal_tol = 1e-10;  // relative to the matrix scale
  bool compute_vectors = true;
};

/// Eigen decomposition of a dense symmetric matrix: Householder reduction to
/// tridiagonal form followed by implicit QL with Wilkinson shifts.
/// Only the lower triangle of `a` is read.
/// Throws EigenConvergenceError when the iteration cap is reached before the
/// off-diagonal falls under tolerance.
SymmetricEigen symmetric_eigen(const Matrix& a, const EigenOptions& options = {});

}  // namespace gennape

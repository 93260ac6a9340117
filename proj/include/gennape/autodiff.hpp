// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gennape/linalg.hpp"

// Minimal reverse-mode differentiation over dense matrices.
//
// A Tape records values in evaluation order; each recorded node that depends
// on a gradient-requiring input keeps a closure that pushes its output
// gradient to its inputs. backward() walks the tape once in reverse.
namespace gennape::ad {

struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad)>;

  Var constant(Matrix value);
  Var variable(Matrix value);
  /// Leaves that read `value` in place instead of copying it. The matrix must
  /// outlive the tape and stay unchanged while the tape is in use.
  Var constant_ref(const Matrix& value);
  Var variable_ref(const Matrix& value);

  const Matrix& value(Var v) const {
    const Node& n = nodes_[idx(v)];
    return n.ref ? *n.ref : n.value;
  }
  bool requires_grad(Var v) const { return nodes_[idx(v)].requires_grad; }
  /// Gradient accumulated by backward(); zeros when the node got none.
  Matrix grad(Var v) const;
  /// Like grad() but moves the gradient out of the tape.
  Matrix take_grad(Var v);

  /// Seed a 1x1 output with 1 and propagate.
  void backward(Var loss);
  /// Seed an arbitrary output with `seed` and propagate.
  void backward(Var out, const Matrix& seed);

  /// Record a node. `fn` is dropped when `requires_grad` is false.
  Var push(Matrix value, bool requires_grad, Backward fn);
  /// Add `g` into the gradient of `v` (no-op for constants).
  void accumulate(Var v, const Matrix& g);
  void accumulate(Var v, Matrix&& g);

  std::size_t size() const { return nodes_.size(); }
  /// Id the next pushed node will receive; lets a closure refer to its own output.
  Var next() const { return Var{static_cast<std::int32_t>(nodes_.size())}; }

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward back;
  };
  static std::size_t idx(Var v) { return static_cast<std::size_t>(v.id); }

  std::vector<Node> nodes_;
};

Var matmul(Tape& t, Var a, Var b);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
/// a (n x k) + row (1 x k), broadcast over rows.
Var add_row(Tape& t, Var a, Var row);
/// Elementwise product of equal shapes.
Var mul(Tape& t, Var a, Var b);
/// a (n x k) scaled row-wise by col (n x 1).
Var mul_col(Tape& t, Var a, Var col);
Var scale(Tape& t, Var a, double s);
Var transpose(Tape& t, Var a);

Var relu(Tape& t, Var a);
Var tanh(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
/// x * sigmoid(x)
Var swish(Tape& t, Var a);

Var softmax_rows(Tape& t, Var a);
/// Rows scaled to unit Euclidean norm. Throws DegenerateProjection when a row
/// has norm below 1e-12.
Var l2_normalize_rows(Tape& t, Var a);

/// Column means, 1 x k.
Var mean_rows(Tape& t, Var a);
Var sum_all(Tape& t, Var a);
Var concat_cols(Tape& t, Var a, Var b);
Var slice_cols(Tape& t, Var a, Eigen::Index start, Eigen::Index count);

/// mean((pred - target)^2) as a 1x1 node.
Var mse(Tape& t, Var pred, Var target);
/// Mean logistic loss of logits against {0,1} labels, 1x1.
Var logistic_loss(Tape& t, Var logits, Var labels);

}  // namespace gennape::ad

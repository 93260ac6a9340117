// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/autodiff.hpp"

#include <cassert>
#include <cmath>

#include "gennape/error.hpp"

namespace gennape::ad {

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::constant_ref(const Matrix& value) {
  const Var v = push(Matrix(), false, nullptr);
  nodes_.back().ref = &value;
  return v;
}

Var Tape::variable_ref(const Matrix& value) {
  const Var v = push(Matrix(), true, nullptr);
  nodes_.back().ref = &value;
  return v;
}

Var Tape::push(Matrix value, bool requires_grad, Backward fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.back = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[idx(v)];
  if (!n.has_grad) return Matrix::Zero(value(v).rows(), value(v).cols());
  return n.grad;
}

Matrix Tape::take_grad(Var v) {
  Node& n = nodes_[idx(v)];
  if (!n.has_grad) return Matrix::Zero(value(v).rows(), value(v).cols());
  n.has_grad = false;
  return std::move(n.grad);
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[idx(v)];
  if (!n.requires_grad) return;
  assert(g.rows() == value(v).rows() && g.cols() == value(v).cols());
  if (n.has_grad) {
    n.grad += g;
  } else {
    n.grad = g;
    n.has_grad = true;
  }
}

void Tape::accumulate(Var v, Matrix&& g) {
  Node& n = nodes_[idx(v)];
  if (!n.requires_grad) return;
  assert(g.rows() == value(v).rows() && g.cols() == value(v).cols());
  if (n.has_grad) {
    n.grad += g;
  } else {
    n.grad = std::move(g);
    n.has_grad = true;
  }
}

void Tape::backward(Var loss) { backward(loss, Matrix::Ones(1, 1)); }

void Tape::backward(Var out, const Matrix& seed) {
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  accumulate(out, seed);
  for (std::size_t i = idx(out) + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.has_grad && n.back) n.back(*this, n.grad);
  }
}

namespace {
bool any_grad(const Tape& t, Var a) { return t.requires_grad(a); }
bool any_grad(const Tape& t, Var a, Var b) { return t.requires_grad(a) || t.requires_grad(b); }
}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  Matrix v = t.value(a) * t.value(b);
  return t.push(std::move(v), any_grad(t, a, b), [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * tp.value(b).transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, tp.value(a).transpose() * g);
  });
}

Var add(Tape& t, Var a, Var b) {
  Matrix v = t.value(a) + t.value(b);
  return t.push(std::move(v), any_grad(t, a, b), [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Tape& t, Var a, Var b) {
  Matrix v = t.value(a) - t.value(b);
  return t.push(std::move(v), any_grad(t, a, b), [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, -g);
  });
}

Var add_row(Tape& t, Var a, Var row) {
  Matrix v = t.value(a).rowwise() + t.value(row).row(0);
  return t.push(std::move(v), any_grad(t, a, row), [a, row](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(row)) tp.accumulate(row, g.colwise().sum());
  });
}

Var mul(Tape& t, Var a, Var b) {
  Matrix v = t.value(a).cwiseProduct(t.value(b));
  return t.push(std::move(v), any_grad(t, a, b), [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g.cwiseProduct(tp.value(b)));
    if (tp.requires_grad(b)) tp.accumulate(b, g.cwiseProduct(tp.value(a)));
  });
}

Var mul_col(Tape& t, Var a, Var col) {
  Matrix v = t.value(a).array().colwise() * t.value(col).col(0).array();
  return t.push(std::move(v), any_grad(t, a, col), [a, col](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) {
      tp.accumulate(a, (g.array().colwise() * tp.value(col).col(0).array()).matrix());
    }
    if (tp.requires_grad(col)) tp.accumulate(col, g.cwiseProduct(tp.value(a)).rowwise().sum());
  });
}

Var scale(Tape& t, Var a, double s) {
  Matrix v = t.value(a) * s;
  return t.push(std::move(v), any_grad(t, a), [a, s](Tape& tp, const Matrix& g) { tp.accumulate(a, g * s); });
}

Var transpose(Tape& t, Var a) {
  Matrix v = t.value(a).transpose();
  return t.push(std::move(v), any_grad(t, a),
                [a](Tape& tp, const Matrix& g) { tp.accumulate(a, g.transpose()); });
}

Var relu(Tape& t, Var a) {
  Matrix v = t.value(a).cwiseMax(0.0);
  return t.push(std::move(v), any_grad(t, a), [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, (tp.value(a).array() > 0.0).select(g, 0.0));
  });
}

Var tanh(Tape& t, Var a) {
  Matrix v = t.value(a).array().tanh().matrix();
  const Var out = t.next();
  return t.push(std::move(v), any_grad(t, a), [a, out](Tape& tp, const Matrix& g) {
    const auto& y = tp.value(out).array();
    tp.accumulate(a, (g.array() * (1.0 - y * y)).matrix());
  });
}

Var sigmoid(Tape& t, Var a) {
  Matrix v = (1.0 / (1.0 + (-t.value(a).array()).exp())).matrix();
  const Var out = t.next();
  return t.push(std::move(v), any_grad(t, a), [a, out](Tape& tp, const Matrix& g) {
    const auto& y = tp.value(out).array();
    tp.accumulate(a, (g.array() * y * (1.0 - y)).matrix());
  });
}

Var swish(Tape& t, Var a) {
  const auto& x = t.value(a).array();
  Matrix s = (1.0 / (1.0 + (-x).exp())).matrix();
  Matrix v = (x * s.array()).matrix();
  if (!t.requires_grad(a)) return t.constant(std::move(v));
  return t.push(std::move(v), true, [a, s = std::move(s)](Tape& tp, const Matrix& g) {
    const auto& xx = tp.value(a).array();
    const auto& ss = s.array();
    tp.accumulate(a, (g.array() * (ss + xx * ss * (1.0 - ss))).matrix());
  });
}

Var softmax_rows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix v(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double peak = x.row(r).maxCoeff();
    v.row(r) = (x.row(r).array() - peak).exp().matrix();
    v.row(r) /= v.row(r).sum();
  }
  const Var out = t.next();
  return t.push(std::move(v), any_grad(t, a), [a, out](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(out);
    const Vector dots = g.cwiseProduct(y).rowwise().sum();
    Matrix ga = y.cwiseProduct(g.colwise() - dots);
    tp.accumulate(a, ga);
  });
}

Var l2_normalize_rows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Vector norms = x.rowwise().norm();
  for (Eigen::Index r = 0; r < norms.size(); ++r) {
    if (norms[r] < 1e-12) {
      throw DegenerateProjection("row " + std::to_string(r) + " has norm below 1e-12");
    }
  }
  Matrix v = x.array().colwise() / norms.array();
  const Var out = t.next();
  return t.push(std::move(v), any_grad(t, a), [a, out, norms = std::move(norms)](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(out);
    const Vector dots = g.cwiseProduct(y).rowwise().sum();
    Matrix ga = (g - (y.array().colwise() * dots.array()).matrix()).array().colwise() / norms.array();
    tp.accumulate(a, ga);
  });
}

Var mean_rows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  const double n = static_cast<double>(x.rows());
  Matrix v = x.colwise().mean();
  const Eigen::Index rows = x.rows();
  return t.push(std::move(v), any_grad(t, a), [a, n, rows](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.replicate(rows, 1) / n);
  });
}

Var sum_all(Tape& t, Var a) {
  Matrix v = Matrix::Constant(1, 1, t.value(a).sum());
  return t.push(std::move(v), any_grad(t, a), [a](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(a);
    tp.accumulate(a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var concat_cols(Tape& t, Var a, Var b) {
  const Matrix& x = t.value(a);
  const Matrix& y = t.value(b);
  Matrix v(x.rows(), x.cols() + y.cols());
  v << x, y;
  const Eigen::Index ca = x.cols(), cb = y.cols();
  return t.push(std::move(v), any_grad(t, a, b), [a, b, ca, cb](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g.leftCols(ca));
    if (tp.requires_grad(b)) tp.accumulate(b, g.rightCols(cb));
  });
}

Var slice_cols(Tape& t, Var a, Eigen::Index start, Eigen::Index count) {
  Matrix v = t.value(a).middleCols(start, count);
  return t.push(std::move(v), any_grad(t, a), [a, start, count](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(a);
    Matrix ga = Matrix::Zero(x.rows(), x.cols());
    ga.middleCols(start, count) = g;
    tp.accumulate(a, ga);
  });
}

Var mse(Tape& t, Var pred, Var target) {
  const Matrix diff = t.value(pred) - t.value(target);
  const double n = static_cast<double>(diff.size());
  Matrix v = Matrix::Constant(1, 1, diff.squaredNorm() / n);
  return t.push(std::move(v), any_grad(t, pred, target), [pred, target, diff, n](Tape& tp, const Matrix& g) {
    const Matrix gd = diff * (2.0 * g(0, 0) / n);
    tp.accumulate(pred, gd);
    if (tp.requires_grad(target)) tp.accumulate(target, -gd);
  });
}

Var logistic_loss(Tape& t, Var logits, Var labels) {
  const Matrix& x = t.value(logits);
  const Matrix& y = t.value(labels);
  const double n = static_cast<double>(x.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double z = x(i);
    // log(1 + exp(z)) - y z, evaluated stably
    total += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y(i) * z;
  }
  Matrix v = Matrix::Constant(1, 1, total / n);
  return t.push(std::move(v), any_grad(t, logits), [logits, labels, n](Tape& tp, const Matrix& g) {
    const Matrix& xx = tp.value(logits);
    const Matrix& yy = tp.value(labels);
    Matrix p = (1.0 / (1.0 + (-xx.array()).exp())).matrix();
    tp.accumulate(logits, (p - yy) * (g(0, 0) / n));
  });
}

}  // namespace gennape::ad

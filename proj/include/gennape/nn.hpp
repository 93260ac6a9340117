// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gennape/autodiff.hpp"
#include "gennape/linalg.hpp"
#include "gennape/rng.hpp"

namespace gennape {

/// Ordered collection of named trainable matrices.
class ParamSet {
 public:
  std::size_t add(std::string name, Matrix value);
  std::size_t size() const { return values_.size(); }
  Matrix& operator[](std::size_t i) { return values_[i]; }
  const Matrix& operator[](std::size_t i) const { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::optional<std::size_t> find(const std::string& name) const;
  bool all_finite() const;
  /// Total scalar count.
  std::size_t count() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    if (a.names_ != b.names_) return false;
    for (std::size_t i = 0; i < a.values_.size(); ++i) {
      if (a.values_[i].rows() != b.values_[i].rows() || a.values_[i].cols() != b.values_[i].cols() ||
          a.values_[i] != b.values_[i]) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

/// Tape leaves for every parameter, in ParamSet order. The leaves read the
/// parameters in place, so `params` must not change while the tape is alive.
std::vector<ad::Var> bind(ad::Tape& tape, const ParamSet& params);
std::vector<Matrix> gradients(ad::Tape& tape, const std::vector<ad::Var>& vars);

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(double lr = 1e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// Update `params` in place. Entries of `mask` that are false are skipped.
  void step(ParamSet& params, const std::vector<Matrix>& grads, const std::vector<bool>& mask = {});
  long steps() const { return t_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

/// Half-cosine decay from `initial` at step 0 towards 0 at step `total`.
double cosine_lr(double initial, std::size_t step, std::size_t total);

/// Fully connected stack: ReLU after every layer except the last.
struct Mlp {
  std::vector<std::size_t> weights;  // indices into a ParamSet, (in x out)
  std::vector<std::size_t> biases;   // (1 x out)
};

/// dims = {in, hidden..., out}.
Mlp add_mlp(ParamSet& params, const std::string& prefix, const std::vector<int>& dims, Rng& rng);

ad::Var mlp_forward(ad::Tape& t, const std::vector<ad::Var>& vars, const Mlp& mlp, ad::Var x);
/// Tape-free forward pass for inference.
Matrix mlp_eval(const ParamSet& params, const Mlp& mlp, const Matrix& x);

/// He-uniform weight matrix (fan_in x fan_out).
Matrix he_uniform(int fan_in, int fan_out, Rng& rng);

}  // namespace gennape

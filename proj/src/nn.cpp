// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/nn.hpp"

#include <cmath>
#include <numbers>

namespace gennape {

std::size_t ParamSet::add(std::string name, Matrix value) {
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

bool ParamSet::all_finite() const {
  for (const auto& v : values_) {
    if (!v.allFinite()) return false;
  }
  return true;
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

std::vector<ad::Var> bind(ad::Tape& tape, const ParamSet& params) {
  std::vector<ad::Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(tape.variable_ref(params[i]));
  return vars;
}

std::vector<Matrix> gradients(ad::Tape& tape, const std::vector<ad::Var>& vars) {
  std::vector<Matrix> g;
  g.reserve(vars.size());
  for (auto v : vars) g.push_back(tape.take_grad(v));
  return g;
}

double cosine_lr(double initial, std::size_t step, std::size_t total) {
  if (total == 0) return initial;
  const double x = static_cast<double>(std::min(step, total)) / static_cast<double>(total);
  return 0.5 * initial * (1.0 + std::cos(std::numbers::pi * x));
}

void Adam::step(ParamSet& params, const std::vector<Matrix>& grads, const std::vector<bool>& mask) {
  if (m_.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.push_back(Matrix::Zero(params[i].rows(), params[i].cols()));
      v_.push_back(Matrix::Zero(params[i].rows(), params[i].cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

Matrix he_uniform(int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  Matrix w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.uniform(-bound, bound);
  return w;
}

Mlp add_mlp(ParamSet& params, const std::string& prefix, const std::vector<int>& dims, Rng& rng) {
  Mlp mlp;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::string tag = prefix + ".l" + std::to_string(l);
    mlp.weights.push_back(params.add(tag + ".w", he_uniform(dims[l], dims[l + 1], rng)));
    mlp.biases.push_back(params.add(tag + ".b", Matrix::Zero(1, dims[l + 1])));
  }
  return mlp;
}

ad::Var mlp_forward(ad::Tape& t, const std::vector<ad::Var>& vars, const Mlp& mlp, ad::Var x) {
  ad::Var h = x;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    h = ad::add_row(t, ad::matmul(t, h, vars[mlp.weights[l]]), vars[mlp.biases[l]]);
    if (l + 1 < mlp.weights.size()) h = ad::relu(t, h);
  }
  return h;
}

Matrix mlp_eval(const ParamSet& params, const Mlp& mlp, const Matrix& x) {
  Matrix h = x;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    Matrix next = h * params[mlp.weights[l]];
    next.rowwise() += params[mlp.biases[l]].row(0);
    if (l + 1 < mlp.weights.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

}  // namespace gennape

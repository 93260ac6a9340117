// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <functional>
#include <string>

#include "gennape/autodiff.hpp"
#include "gennape/error.hpp"
#include "gennape/nn.hpp"
#include "support.hpp"

namespace gennape {
namespace {

using Builder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

// Scalar loss = sum(out .* R) for a fixed random R so every output entry
// carries a distinct weight.
struct Case {
  std::string name;
  std::vector<std::pair<int, int>> shapes;
  Builder build;
};

testing::GradCheck run_case(const Case& c, std::uint64_t seed) {
  Rng rng(seed);
  ParamSet params;
  for (std::size_t i = 0; i < c.shapes.size(); ++i) {
    Matrix m(c.shapes[i].first, c.shapes[i].second);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-1.5, 1.5);
    params.add("p" + std::to_string(i), m);
  }
  Matrix weights;
  const auto loss = [&](bool with_grad, std::vector<Matrix>* grads) {
    ad::Tape t;
    std::vector<ad::Var> vars;
    for (std::size_t i = 0; i < params.size(); ++i) {
      vars.push_back(with_grad ? t.variable(params[i]) : t.constant(params[i]));
    }
    const ad::Var out = c.build(t, vars);
    if (weights.size() == 0) {
      Rng wr(seed + 1);
      weights.resize(t.value(out).rows(), t.value(out).cols());
      for (Eigen::Index k = 0; k < weights.size(); ++k) weights.data()[k] = wr.uniform(-1, 1);
    }
    const ad::Var l = ad::sum_all(t, ad::mul(t, out, t.constant(weights)));
    if (grads) {
      t.backward(l);
      *grads = gradients(t, vars);
    }
    return t.value(l)(0, 0);
  };
  std::vector<Matrix> grads;
  loss(true, &grads);
  return testing::check_gradients(params, grads, [&] { return loss(false, nullptr); }, 40, seed + 2);
}

std::vector<Case> cases() {
  using V = const std::vector<ad::Var>&;
  return {
      {"matmul", {{3, 4}, {4, 2}}, [](ad::Tape& t, V v) { return ad::matmul(t, v[0], v[1]); }},
      {"add", {{3, 4}, {3, 4}}, [](ad::Tape& t, V v) { return ad::add(t, v[0], v[1]); }},
      {"sub", {{3, 4}, {3, 4}}, [](ad::Tape& t, V v) { return ad::sub(t, v[0], v[1]); }},
      {"add_row", {{3, 4}, {1, 4}}, [](ad::Tape& t, V v) { return ad::add_row(t, v[0], v[1]); }},
      {"mul", {{3, 4}, {3, 4}}, [](ad::Tape& t, V v) { return ad::mul(t, v[0], v[1]); }},
      {"mul_col", {{3, 4}, {3, 1}}, [](ad::Tape& t, V v) { return ad::mul_col(t, v[0], v[1]); }},
      {"scale", {{3, 4}}, [](ad::Tape& t, V v) { return ad::scale(t, v[0], -2.5); }},
      {"transpose", {{3, 4}}, [](ad::Tape& t, V v) { return ad::transpose(t, v[0]); }},
      {"relu", {{5, 4}}, [](ad::Tape& t, V v) { return ad::relu(t, v[0]); }},
      {"tanh", {{3, 4}}, [](ad::Tape& t, V v) { return ad::tanh(t, v[0]); }},
      {"sigmoid", {{3, 4}}, [](ad::Tape& t, V v) { return ad::sigmoid(t, v[0]); }},
      {"swish", {{3, 4}}, [](ad::Tape& t, V v) { return ad::swish(t, v[0]); }},
      {"softmax_rows", {{3, 5}}, [](ad::Tape& t, V v) { return ad::softmax_rows(t, v[0]); }},
      {"l2_normalize_rows", {{3, 5}}, [](ad::Tape& t, V v) { return ad::l2_normalize_rows(t, v[0]); }},
      {"mean_rows", {{4, 3}}, [](ad::Tape& t, V v) { return ad::mean_rows(t, v[0]); }},
      {"concat_cols", {{3, 2}, {3, 4}}, [](ad::Tape& t, V v) { return ad::concat_cols(t, v[0], v[1]); }},
      {"slice_cols", {{3, 6}}, [](ad::Tape& t, V v) { return ad::slice_cols(t, v[0], 2, 3); }},
      {"mse", {{4, 1}, {4, 1}}, [](ad::Tape& t, V v) { return ad::mse(t, v[0], v[1]); }},
      {"logistic_loss", {{6, 1}},
       [](ad::Tape& t, V v) {
         return ad::logistic_loss(t, v[0], t.constant((Matrix(6, 1) << 1, 0, 1, 1, 0, 0).finished()));
       }},
      {"attention",
       {{4, 6}, {6, 3}, {6, 3}},
       [](ad::Tape& t, V v) {
         const auto q = ad::matmul(t, v[0], v[1]);
         const auto k = ad::matmul(t, v[0], v[2]);
         const auto a = ad::softmax_rows(t, ad::scale(t, ad::matmul(t, q, ad::transpose(t, k)), 0.5));
         return ad::matmul(t, a, v[0]);
       }},
  };
}

TEST(Autodiff, EveryOpMatchesFiniteDifferences) {
  for (const auto& c : cases()) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto r = run_case(c, 100 * s + 1);
      EXPECT_GT(r.checked, 0) << c.name;
      EXPECT_LT(r.max_rel, 1e-4) << c.name << " point " << s;
    }
  }
}

TEST(Autodiff, SharedInputAccumulates) {
  ad::Tape t;
  const auto x = t.variable(Matrix::Constant(1, 1, 3.0));
  const auto y = ad::add(t, ad::mul(t, x, x), x);  // x^2 + x
  t.backward(y);
  EXPECT_EQ(t.grad(x)(0, 0), 7.0);
}

TEST(Autodiff, ConstantsGetNoGradient) {
  ad::Tape t;
  const auto c = t.constant(Matrix::Ones(2, 2));
  const auto x = t.variable(Matrix::Ones(2, 2));
  t.backward(ad::sum_all(t, ad::mul(t, c, x)));
  EXPECT_FALSE(t.requires_grad(c));
  EXPECT_EQ(t.grad(c), Matrix::Zero(2, 2));
  EXPECT_EQ(t.grad(x), Matrix::Ones(2, 2));
}

TEST(Autodiff, NormalizeRejectsZeroRow) {
  ad::Tape t;
  EXPECT_THROW(ad::l2_normalize_rows(t, t.variable(Matrix::Zero(1, 3))), DegenerateProjection);
}

TEST(Adam, MaskSkipsParameters) {
  ParamSet p;
  p.add("a", Matrix::Ones(2, 2));
  p.add("b", Matrix::Ones(2, 2));
  Adam opt(0.1);
  opt.step(p, {Matrix::Ones(2, 2), Matrix::Ones(2, 2)}, {true, false});
  EXPECT_NE(p[0], Matrix::Ones(2, 2));
  EXPECT_EQ(p[1], Matrix::Ones(2, 2));
  // First bias-corrected step moves each weight by lr.
  EXPECT_NEAR(p[0](0, 0), 0.9, 1e-6);
}

TEST(Mlp, TapeAndEvalAgree) {
  Rng rng(4);
  ParamSet p;
  const Mlp mlp = add_mlp(p, "m", {5, 7, 7, 2}, rng);
  Matrix x(3, 5);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.uniform(-1, 1);
  ad::Tape t;
  const auto vars = bind(t, p);
  const auto out = mlp_forward(t, vars, mlp, t.constant(x));
  EXPECT_LT((t.value(out) - mlp_eval(p, mlp, x)).norm(), 1e-12);
}

}  // namespace
}  // namespace gennape

// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gennape/error.hpp"
#include "gennape/families.hpp"
#include "gennape/metrics.hpp"
#include "gennape/predictor.hpp"
#include "support.hpp"

namespace gennape {
namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix x(rows, cols);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.normal();
  return x;
}

// Head j outputs the constant `value` regardless of input.
void make_constant(EnsembleModel& m, std::size_t j, double value) {
  const Mlp& h = m.heads[j];
  m.params[h.weights.back()].setZero();
  m.params[h.biases.back()].setConstant(value);
}

TEST(Transform, HandValues) {
  EXPECT_EQ(raw_label(90.0, 9.0), 45.0);
  EXPECT_EQ(raw_label(73.5, 0.0), 73.5);
  EXPECT_EQ(raw_label(90.0, 9.0, false), 90.0);
  const TransformStats st{40.0, 2.5, 80.0, true};
  EXPECT_EQ(transform_label(90.0, 9.0, st), (45.0 - 40.0) / 2.5);
}

TEST(Transform, RoundTripThousandPairs) {
  Rng rng(1);
  const TransformStats st{45.0, 3.0, 80.0, true};
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double a = rng.uniform(0.0, 100.0);
    const double f = t % 10 == 0 ? 0.0 : std::exp(rng.uniform(-8.0, 4.0));
    worst = std::max(worst, std::abs(inverse_transform(transform_label(a, f, st), f, st) - a));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Transform, StatsPruneLowAccuracies) {
  const std::vector<double> acc{10.0, 50.0, 85.0, 95.0};
  const std::vector<double> flops{0.0, 0.0, 0.0, 0.0};
  const auto st = fit_transform_stats(acc, flops);
  EXPECT_EQ(st.mean, 90.0);
  EXPECT_EQ(st.stddev, 5.0);
  EXPECT_THROW(fit_transform_stats(std::vector<double>{10.0}, std::vector<double>{0.0}), InsufficientSamples);
  EXPECT_THROW(fit_transform_stats(std::vector<double>{90.0, 90.0}, std::vector<double>{1.0, 1.0}),
               DegenerateVariance);
}

TEST(Ensemble, SingleClusterEqualsItsHead) {
  Rng rng(2);
  const Matrix x = random_matrix(20, 6, rng);
  const auto m = EnsembleModel::init(single_cluster(6), {}, 6, 3, 32, 2);
  const Matrix direct = mlp_eval(m.params, m.heads[0], x);
  const Vector y = ensemble_predict(m, x);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(y[i], direct(i, 0));
}

TEST(Ensemble, WeightedSumHandCase) {
  Rng rng(3);
  FcmModel two;
  two.clusters = 2;
  two.centroids = Matrix::Zero(2, 4);
  auto e = EnsembleModel::init(two, {}, 4, 5, 16, 2);
  make_constant(e, 0, 0.0);
  make_constant(e, 1, 1.0);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix u = (Matrix(3, 2) << 0.25, 0.75, 0.5, 0.5, 1.0, 0.0).finished();
  const Vector y = ensemble_predict(e, x, u);
  EXPECT_EQ(y[0], 0.75);
  EXPECT_EQ(y[1], 0.5);
  EXPECT_EQ(y[2], 0.0);
  make_constant(e, 1, 0.0);
  make_constant(e, 0, 0.0);
  EXPECT_EQ(ensemble_predict(e, x, u), Vector::Zero(3));
}

TEST(Ensemble, ZeroMembershipHeadsAreIrrelevant) {
  Rng rng(4);
  FcmModel three;
  three.clusters = 3;
  three.centroids = Matrix::Zero(3, 5);
  auto e = EnsembleModel::init(three, {}, 5, 6, 16, 2);
  const Matrix x = random_matrix(10, 5, rng);
  Matrix u = Matrix::Zero(10, 3);
  for (int i = 0; i < 10; ++i) u(i, 0) = 0.4, u(i, 2) = 0.6;
  const Vector before = ensemble_predict(e, x, u);
  for (std::size_t idx : e.heads[1].weights) e.params[idx] = random_matrix(e.params[idx].rows(), e.params[idx].cols(), rng);
  EXPECT_EQ(ensemble_predict(e, x, u), before);
}

TEST(Ensemble, IdenticalHeadsGiveTheirValue) {
  Rng rng(5);
  FcmModel two;
  two.clusters = 2;
  two.centroids = Matrix::Zero(2, 3);
  auto e = EnsembleModel::init(two, {}, 3, 7, 8, 2);
  for (std::size_t l = 0; l < e.heads[0].weights.size(); ++l) {
    e.params[e.heads[1].weights[l]] = e.params[e.heads[0].weights[l]];
    e.params[e.heads[1].biases[l]] = e.params[e.heads[0].biases[l]];
  }
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix u = (Matrix(4, 2) << 0.1, 0.9, 0.5, 0.5, 0.3, 0.7, 1, 0).finished();
  const Matrix single = mlp_eval(e.params, e.heads[0], x);
  const Vector y = ensemble_predict(e, x, u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(y[i], single(i, 0), 1e-12);
}

TEST(Ensemble, LossGradientMatchesFiniteDifferences) {
  Rng rng(6);
  for (std::uint64_t point = 0; point < 10; ++point) {
    const Matrix x = random_matrix(7, 5, rng);
    auto fcm = fcm_fit(x, 3, 2.0, point);
    auto e = EnsembleModel::init(fcm, {}, 5, point, 12, 3);
    const Matrix u = fcm_memberships(x, e.fcm);
    const Vector y = random_matrix(7, 1, rng);
    const auto lg = ensemble_loss(e, x, u, y, true);
    const auto check = testing::check_gradients(e.params, lg.grads,
                                                [&] { return ensemble_loss(e, x, u, y, false).loss; }, 6, point);
    EXPECT_GT(check.checked, 0);
    EXPECT_LT(check.max_rel, 1e-4);
  }
}

TEST(Ensemble, TrainingIsSeedDeterministic) {
  Rng rng(7);
  const Matrix x = random_matrix(64, 6, rng);
  const Vector y = random_matrix(64, 1, rng);
  const auto fcm = fcm_fit(x, 2, 2.0, 1);
  auto a = EnsembleModel::init(fcm, {}, 6, 2, 32, 2);
  auto b = EnsembleModel::init(fcm, {}, 6, 2, 32, 2);
  TrainConfig tc;
  tc.epochs = 5;
  tc.seed = 4;
  train_heads(a, x, y, tc);
  train_heads(b, x, y, tc);
  EXPECT_TRUE(a.params == b.params);
}

TEST(Ensemble, SingleClusterFcmMatchesPlainVariant) {
  Rng rng(8);
  const Matrix x = random_matrix(48, 6, rng);
  const Vector y = random_matrix(48, 1, rng);
  TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 9;
  auto plain = EnsembleModel::init(single_cluster(6), {}, 6, 3);
  auto fcm1 = EnsembleModel::init(fcm_fit(x, 1, 4.0, 5), {}, 6, 3);
  train_heads(plain, x, y, tc);
  train_heads(fcm1, x, y, tc);
  EXPECT_EQ(ensemble_predict(plain, x), ensemble_predict(fcm1, x));
}

// Capacity check. The learning rate is raised above the default so that 400
// epochs of 1 batch are enough to fit the 32 samples.
TEST(Ensemble, OverfitsThirtyTwoSamples) {
  Rng rng(9);
  const Matrix x = random_matrix(32, 8, rng);
  std::vector<double> acc(32), flops(32);
  for (int i = 0; i < 32; ++i) {
    acc[static_cast<std::size_t>(i)] = rng.uniform(82.0, 94.0);
    flops[static_cast<std::size_t>(i)] = rng.uniform(0.01, 2.0);
  }
  const auto st = fit_transform_stats(acc, flops);
  Vector y(32);
  for (int i = 0; i < 32; ++i) y[i] = transform_label(acc[static_cast<std::size_t>(i)], flops[static_cast<std::size_t>(i)], st);
  auto m = EnsembleModel::init(fcm_fit(x, 2, 2.0, 1), st, 8, 1);
  TrainConfig tc;
  tc.epochs = 400;
  tc.learning_rate = 1e-3;
  train_heads(m, x, y, tc);
  const Vector pred = ensemble_predict_accuracy(m, x, flops);
  EXPECT_LT(mae(std::vector<double>(pred.data(), pred.data() + 32), acc), 0.1);
}

TEST(FineTune, ZeroStepsAndSnapshot) {
  Rng rng(10);
  const Matrix x = random_matrix(10, 4, rng);
  const Vector y = random_matrix(10, 1, rng);
  const auto m = EnsembleModel::init(single_cluster(4), {}, 4, 1, 16, 2);
  TrainConfig none = fine_tune_defaults(1);
  none.epochs = 0;
  EXPECT_TRUE(fine_tune(m, x, y, none).params == m.params);
  const auto before = m.params;
  TrainConfig few = fine_tune_defaults(1);
  few.epochs = 2;
  const auto tuned = fine_tune(m, x, y, few);
  EXPECT_TRUE(m.params == before);
  EXPECT_FALSE(tuned.params == before);
  EXPECT_THROW(fine_tune(m, Matrix(0, 4), Vector(0), few), InsufficientSamples);
  EXPECT_EQ(fine_tune_defaults().epochs, 100);
  EXPECT_EQ(fine_tune_defaults().batch_size, 1);
}

TEST(FineTune, SampleSelectionDependsOnlyOnSeed) {
  const auto a = select_finetune_samples(500, 50, 3);
  EXPECT_EQ(a, select_finetune_samples(500, 50, 3));
  EXPECT_NE(a, select_finetune_samples(500, 50, 4));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 50u);
  for (std::size_t i : a) EXPECT_LT(i, 500u);
  EXPECT_THROW(select_finetune_samples(10, 11, 0), InsufficientSamples);
}

TEST(Pairwise, AntisymmetricAndSelfZero) {
  Rng rng(11);
  const auto m = PairwiseModel::init(fcm_fit(random_matrix(20, 5, rng), 3, 2.0, 1), 5, 2);
  for (int t = 0; t < 50; ++t) {
    const Vector a = random_matrix(5, 1, rng), b = random_matrix(5, 1, rng);
    EXPECT_EQ(pairwise_score(m, a, b), -pairwise_score(m, b, a));
    EXPECT_EQ(pairwise_score(m, a, a), 0.0);
  }
}

TEST(Pairwise, LossGradientMatchesFiniteDifferences) {
  Rng rng(12);
  for (std::uint64_t point = 0; point < 10; ++point) {
    const Matrix x = random_matrix(6, 4, rng);
    auto m = PairwiseModel::init(fcm_fit(x, 2, 2.0, point), 4, point, 10, 3);
    const Matrix u = fcm_memberships(x, m.fcm);
    const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 1}, {2, 3}, {4, 5}, {1, 4}, {5, 0}};
    const auto lg = pairwise_loss(m, x, u, pairs, true);
    const auto check = testing::check_gradients(m.params, lg.grads,
                                                [&] { return pairwise_loss(m, x, u, pairs, false).loss; }, 6, point);
    EXPECT_GT(check.checked, 0);
    EXPECT_LT(check.max_rel, 1e-4);
  }
}

TEST(Pairwise, SamplePairsOrientation) {
  const std::vector<double> labels{1.0, 3.0, 2.0, 2.0};
  PairwiseConfig cfg;
  const auto pairs = sample_pairs(labels, cfg, 1);
  EXPECT_EQ(pairs.size(), 5u);  // 6 unordered pairs minus one tie
  for (const auto& [a, b] : pairs) EXPECT_GT(labels[a], labels[b]);
  cfg.all_pairs_limit = 2;
  cfg.pairs_per_sample = 3;
  EXPECT_LE(sample_pairs(labels, cfg, 1).size(), 12u);
}

TEST(Pairwise, LearnsStrictTotalOrder) {
  Rng rng(13);
  const int n = 300;
  const Matrix x = random_matrix(n, 6, rng);
  const Vector w = random_matrix(6, 1, rng);
  const Vector score = x * w;
  std::vector<double> train_labels(200);
  for (int i = 0; i < 200; ++i) train_labels[static_cast<std::size_t>(i)] = score[i];
  auto m = PairwiseModel::init(single_cluster(6), 6, 3);
  PairwiseConfig cfg;
  cfg.train.epochs = 30;
  cfg.train.learning_rate = 1e-3;
  cfg.pairs_per_sample = 16;
  cfg.all_pairs_limit = 0;
  train_pairwise(m, x.topRows(200), train_labels, cfg);
  const Matrix held = x.bottomRows(100);
  const Matrix lat = pairwise_latents(m, held);
  int correct = 0, total = 0;
  for (int a = 0; a < 100; ++a) {
    for (int b = a + 1; b < 100; ++b) {
      const double logit = pairwise_logit(m, lat, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      correct += (logit > 0) == (score[200 + a] > score[200 + b]);
      ++total;
    }
  }
  EXPECT_GT(static_cast<double>(correct) / total, 0.9);
  const auto ranks = pairwise_rank_scores(m, held);
  std::vector<double> truth(score.data() + 200, score.data() + 300);
  EXPECT_GT(srcc(ranks, truth), 0.9);
}

TEST(Baseline, GradientMatchesFiniteDifferences) {
  const auto graphs = generate(FamilyKind::kTwopathLike, 4, 2);
  std::vector<GraphInputs> in;
  for (const auto& g : graphs) in.push_back(graph_inputs(g));
  const Vector y = (Vector(4) << 0.5, -1.0, 0.25, 1.5).finished();
  for (std::uint64_t point = 0; point < 10; ++point) {
    auto m = BaselineGnn::init({}, point, 6, 3, 6, 2);
    const auto lg = baseline_loss(m, in, y, true);
    const auto check =
        testing::check_gradients(m.params, lg.grads, [&] { return baseline_loss(m, in, y, false).loss; }, 6, point);
    EXPECT_GT(check.checked, 0);
    EXPECT_LT(check.max_rel, 1e-4);
  }
}

TEST(Baseline, OverfitsSixteenSamplesAndIsDeterministic) {
  const auto records = build_dataset(FamilyKind::kNb101Like, 16, default_oracle(FamilyKind::kNb101Like, 1), 3);
  std::vector<GraphInputs> in;
  std::vector<double> acc, flops;
  for (const auto& r : records) {
    in.push_back(graph_inputs(r.graph));
    acc.push_back(100.0 * r.accuracy);
    flops.push_back(r.flops_g);
  }
  const auto st = fit_transform_stats(acc, flops);
  Vector y(16);
  for (int i = 0; i < 16; ++i) y[i] = transform_label(acc[static_cast<std::size_t>(i)], flops[static_cast<std::size_t>(i)], st);
  TrainConfig tc;
  tc.epochs = 300;
  tc.batch_size = 16;
  tc.learning_rate = 3e-3;
  tc.seed = 2;
  auto a = BaselineGnn::init(st, 5);
  auto b = BaselineGnn::init(st, 5);
  train_baseline_gnn(a, in, y, tc);
  tc.epochs = 2;
  train_baseline_gnn(b, in, y, tc);
  auto c = BaselineGnn::init(st, 5);
  train_baseline_gnn(c, in, y, tc);
  EXPECT_TRUE(b.params == c.params);
  const auto pred = baseline_predict(a, in);
  std::vector<double> pa;
  for (std::size_t i = 0; i < 16; ++i) pa.push_back(inverse_transform(pred[i], flops[i], st));
  EXPECT_LT(mae(pa, acc), 0.2);
}

TEST(Combine, KtSoftmaxHandValue) {
  const auto w = kt_softmax_weights(std::vector<double>{0.5, 0.0});
  EXPECT_NEAR(w[0], 0.6225, 1e-4);
  EXPECT_NEAR(w[1], 0.3775, 1e-4);
  EXPECT_NEAR(w[0], std::exp(0.5) / (std::exp(0.5) + 1.0), 1e-15);
}

TEST(Combine, ReversedPairTies) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{5, 4, 3, 2, 1};
  const auto r = gennape_combine({a, b}, CombineMode::kZeroShot);
  for (double s : r.scores) EXPECT_EQ(s, r.scores[0]);
  EXPECT_EQ(r.weights, (std::vector<double>{0.5, 0.5}));
}

TEST(Combine, IdenticalConstituentsKeepRanking) {
  const std::vector<double> a{0.3, -2.0, 7.0, 1.0, 4.0};
  const auto r = gennape_combine(std::vector<std::vector<double>>(6, a), CombineMode::kZeroShot);
  EXPECT_EQ(average_ranks(r.scores), average_ranks(a));
}

TEST(Combine, InvariantUnderMonotoneRescaling) {
  Rng rng(14);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<double>> cs(6, std::vector<double>(40));
    for (auto& c : cs)
      for (auto& v : c) v = rng.normal();
    const std::vector<std::size_t> ft{0, 3, 5, 7, 11, 13, 17, 19};
    std::vector<double> labels;
    for (std::size_t i = 0; i < ft.size(); ++i) labels.push_back(rng.uniform());
    for (auto mode : {CombineMode::kZeroShot, CombineMode::kFineTuned}) {
      const auto base = gennape_combine(cs, mode, ft, labels);
      auto moved = cs;
      const std::size_t which = rng.below(6);
      for (auto& v : moved[which]) v = std::exp(3.0 * v) - 10.0;
      const auto other = gennape_combine(moved, mode, ft, labels);
      EXPECT_EQ(other.scores, base.scores);
      EXPECT_EQ(other.weights, base.weights);
    }
  }
}

TEST(Combine, FineTunedWeightsFollowKendallTau) {
  const std::vector<double> good{1, 2, 3, 4, 5, 6};
  const std::vector<double> flat{1, 1, 1, 1, 1, 1};
  const std::vector<std::size_t> ft{0, 2, 4, 5};
  const std::vector<double> labels{10, 30, 50, 60};
  const auto r = gennape_combine({good, flat}, CombineMode::kFineTuned, ft, labels);
  EXPECT_NEAR(r.weights[0], std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-12);
  EXPECT_THROW(gennape_combine({good}, CombineMode::kFineTuned, std::vector<std::size_t>{0},
                               std::vector<double>{1.0}),
               InsufficientSamples);
  EXPECT_THROW(gennape_combine({good, {1, 2}}, CombineMode::kZeroShot), MismatchedLengths);
}

TEST(Combine, RankNormalize) {
  EXPECT_EQ(rank_normalize(std::vector<double>{5.0}), (std::vector<double>{0.5}));
  EXPECT_EQ(rank_normalize(std::vector<double>{3.0, 1.0, 2.0}), (std::vector<double>{1.0, 0.0, 0.5}));
}

}  // namespace
}  // namespace gennape

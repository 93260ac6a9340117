// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gennape/error.hpp"
#include "gennape/fcm.hpp"
#include "support.hpp"

namespace gennape {
namespace {

FcmModel model_with(Matrix centroids, double m) {
  FcmModel model;
  model.clusters = static_cast<int>(centroids.rows());
  model.m = m;
  model.centroids = std::move(centroids);
  return model;
}

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  Matrix x(rows, cols);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = scale * rng.normal();
  return x;
}

TEST(Membership, HandCase) {
  const auto model = model_with((Matrix(2, 1) << 1.0, 2.0).finished(), 2.0);
  const Vector u = fcm_membership(Vector::Zero(1), model);
  EXPECT_EQ(u[0], 0.8);
  EXPECT_EQ(u[1], 0.2);
}

TEST(Membership, EquidistantIsUniform) {
  const auto model = model_with((Matrix(4, 2) << 1, 0, -1, 0, 0, 1, 0, -1).finished(), 2.5);
  const Vector u = fcm_membership(Vector::Zero(2), model);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(u[k], 0.25, 1e-15);
}

TEST(Membership, PointOnCentroidIsHard) {
  const auto model = model_with((Matrix(3, 2) << 0, 0, 1, 1, 2, 2).finished(), 2.0);
  const Vector u = fcm_membership((Vector(2) << 1, 1).finished(), model);
  EXPECT_EQ(u, (Vector(3) << 0, 1, 0).finished());
}

TEST(Membership, MatchesBruteForceOnThousandCases) {
  Rng rng(12);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int c = rng.range(1, 8);
    const int d = rng.range(1, 6);
    const double m = rng.uniform(1.1, 5.0);
    const auto model = model_with(random_matrix(c, d, rng, 3.0), m);
    const Vector x = random_matrix(d, 1, rng, 3.0);
    const Vector u = fcm_membership(x, model);
    const auto want = testing::brute_membership(x, model.centroids, m);
    double sum = 0.0;
    for (int k = 0; k < c; ++k) {
      worst = std::max(worst, std::abs(u[k] - want[static_cast<std::size_t>(k)]));
      EXPECT_GT(u[k], 0.0);
      EXPECT_LE(u[k], 1.0);
      sum += u[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(FcmFit, SingleClusterIsMean) {
  Rng rng(1);
  const Matrix x = random_matrix(50, 3, rng);
  const auto model = fcm_fit(x, 1, 2.0, 4);
  EXPECT_LT((model.centroids.row(0) - x.colwise().mean()).norm(), 1e-12);
  EXPECT_EQ(fcm_memberships(x, model), Matrix::Ones(50, 1));
}

TEST(FcmFit, RecoversTwoBlobs) {
  Rng rng(2);
  const double sd = 1.0;
  Matrix x(2000, 2);
  RowVector mean_a = RowVector::Zero(2), mean_b = RowVector::Zero(2);
  for (int i = 0; i < 2000; ++i) {
    const bool b = i % 2 == 1;
    x(i, 0) = (b ? 10.0 : 0.0) + sd * rng.normal();
    x(i, 1) = (b ? 10.0 : 0.0) + sd * rng.normal();
    (b ? mean_b : mean_a) += x.row(i) / 1000.0;
  }
  const auto model = fcm_fit(x, 2, 2.0, 5);
  EXPECT_TRUE(model.converged);
  const int a = (model.centroids.row(0) - mean_a).norm() < (model.centroids.row(1) - mean_a).norm() ? 0 : 1;
  EXPECT_LT((model.centroids.row(a) - mean_a).norm(), 0.1 * sd);
  EXPECT_LT((model.centroids.row(1 - a) - mean_b).norm(), 0.1 * sd);
}

TEST(FcmFit, SeedDeterminism) {
  Rng rng(3);
  const Matrix x = random_matrix(120, 4, rng);
  EXPECT_EQ(fcm_fit(x, 5, 2.5, 9).centroids, fcm_fit(x, 5, 2.5, 9).centroids);
}

TEST(FcmFit, ObjectiveNeverIncreases) {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Matrix x = random_matrix(150, 3, rng);
    const auto model = fcm_fit(x, rng.range(2, 8), rng.uniform(1.5, 4.0), static_cast<std::uint64_t>(t));
    EXPECT_TRUE(model.objective_monotone);
    ASSERT_FALSE(model.objective.empty());
    for (std::size_t i = 1; i < model.objective.size(); ++i) {
      EXPECT_LE(model.objective[i], model.objective[i - 1] * (1 + 1e-10) + 1e-10);
    }
    EXPECT_TRUE(model.converged);
    EXPECT_LE(model.iterations, model.max_iterations);
    EXPECT_EQ(model.epsilon, 1e-9);
  }
}

TEST(FcmFit, InvariantUnderRowPermutation) {
  Rng rng(5);
  const Matrix x = random_matrix(90, 3, rng);
  const auto base = fcm_fit(x, 4, 2.0, 1);
  for (int t = 0; t < 5; ++t) {
    std::vector<int> perm(90);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Matrix xp(90, 3);
    for (int i = 0; i < 90; ++i) xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    const auto other = fcm_fit(xp, 4, 2.0, 1);
    for (int k = 0; k < 4; ++k) {
      double best = 1e9;
      for (int j = 0; j < 4; ++j) best = std::min(best, (other.centroids.row(j) - base.centroids.row(k)).norm());
      EXPECT_LT(best, 1e-6);
    }
  }
}

TEST(FcmFit, Errors) {
  EXPECT_THROW(fcm_fit(Matrix(0, 3), 1, 2.0, 0), EmptyInput);
  EXPECT_THROW(fcm_fit(Matrix::Ones(4, 2), 2, 1.0, 0), InvalidFuzzifier);
  EXPECT_THROW(fcm_fit(Matrix::Ones(4, 2), 5, 2.0, 0), std::invalid_argument);
  EXPECT_THROW(fcm_fit(Matrix::Ones(4, 2), 0, 2.0, 0), std::invalid_argument);
}

TEST(Reducer, StandardizesTrainingSet) {
  Rng rng(6);
  Matrix e = random_matrix(300, 10, rng);
  e.col(3) *= 40.0;
  e.col(4).array() += 7.0;
  std::vector<double> flops(300);
  for (double& f : flops) f = rng.uniform(0.01, 0.5);
  const auto red = fit_reducer(e, flops, 6);
  EXPECT_EQ(red.output_dim(), 7);
  const Matrix z = red.standardize(e);
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt(z.col(j).squaredNorm() / 300.0), 1.0, 1e-12);
  }
  const Matrix f = red.apply(e, flops);
  EXPECT_EQ(f.cols(), 7);
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    EXPECT_NEAR(f.col(j).mean(), 0.0, 1e-10) << j;
    EXPECT_NEAR(std::sqrt(f.col(j).squaredNorm() / 300.0), 1.0, 1e-10) << j;
  }
  EXPECT_EQ(f, red.apply(e, flops));
  for (std::size_t k = 1; k < red.eigenvalues.size(); ++k) EXPECT_GE(red.eigenvalues[k - 1], red.eigenvalues[k]);
}

TEST(Reducer, RankTwoDataReconstructs) {
  Rng rng(7);
  const Vector u = random_matrix(6, 1, rng), v = random_matrix(6, 1, rng);
  Matrix e(100, 6);
  for (int i = 0; i < 100; ++i) e.row(i) = (rng.normal() * u + rng.normal() * v).transpose();
  const auto red = fit_reducer(e, std::vector<double>(100, 0.1), 2);
  EXPECT_FALSE(red.flops_kept);
  const Matrix z = red.standardize(e);
  const Matrix back = z * red.basis * red.basis.transpose();
  EXPECT_LT((back - z).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Reducer, DropsConstantDimensionWithWarning) {
  Rng rng(8);
  Matrix e = random_matrix(40, 4, rng);
  e.col(2).setConstant(3.0);
  std::vector<std::string> warnings;
  const auto red = fit_reducer(e, std::vector<double>(40, 1.0), 31, &warnings);
  EXPECT_EQ(red.kept, (std::vector<int>{0, 1, 3}));
  EXPECT_FALSE(warnings.empty());
  EXPECT_THROW(fit_reducer(Matrix::Ones(10, 3), std::vector<double>(10, 1.0)), DegenerateVariance);
}

TEST(GridSearch, CoversEveryCellOnce) {
  Rng rng(9);
  const Matrix x = random_matrix(60, 3, rng);
  std::vector<std::pair<int, double>> seen;
  const auto r = grid_search(x, 1, [&](const FcmModel& m) {
    seen.emplace_back(m.clusters, m.m);
    return -std::abs(m.clusters - 16) - std::abs(m.m - 4.0);
  });
  EXPECT_EQ(r.cells.size(), 55u);
  EXPECT_EQ(seen.size(), 55u);
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::unique(seen.begin(), seen.end()), seen.end());
  EXPECT_EQ(r.clusters, 16);
  EXPECT_EQ(r.m, 4.0);
  EXPECT_EQ(r.model.clusters, 16);
}

TEST(GridSearch, TiesPreferSmallerClustersThenFuzzifier) {
  Rng rng(10);
  const Matrix x = random_matrix(40, 2, rng);
  const auto r = grid_search(x, 1, [](const FcmModel& m) { return m.clusters >= 11 && m.m >= 3.5 ? 1.0 : 0.0; });
  EXPECT_EQ(r.clusters, 11);
  EXPECT_EQ(r.m, 3.5);
}

TEST(GridSearch, FailedCellsAreDisqualified) {
  Rng rng(11);
  const Matrix x = random_matrix(40, 2, rng);
  const auto r = grid_search(x, 1, [](const FcmModel& m) {
    if (m.clusters < 20) throw std::runtime_error("boom");
    return m.m;
  });
  EXPECT_EQ(r.clusters, 20);
  EXPECT_EQ(r.m, 4.0);
  int failed = 0;
  for (const auto& c : r.cells) failed += !c.score.has_value();
  EXPECT_EQ(failed, 50);
  EXPECT_THROW(grid_search(x, 1, [](const FcmModel&) -> double { throw std::runtime_error("no"); }), EmptyInput);
}

TEST(GridSearch, ReportedOptimaLieOnTheGrid) {
  const auto on_grid = [](int c, double m) {
    return std::count(kGridClusters.begin(), kGridClusters.end(), c) == 1 &&
           std::count(kGridFuzzifiers.begin(), kGridFuzzifiers.end(), m) == 1;
  };
  EXPECT_TRUE(on_grid(16, 4.0));
  EXPECT_TRUE(on_grid(11, 3.5));
}

TEST(FcmPersistence, RoundTrip) {
  Rng rng(12);
  const Matrix e = random_matrix(80, 5, rng);
  std::vector<double> flops(80, 0.0);
  for (double& f : flops) f = rng.uniform(0.0, 1.0);
  auto model = fcm_fit(e, 3, 2.0, 1);
  model.reducer = fit_reducer(e, flops, 3);
  TensorContainer c;
  save_fcm(c, model);
  const auto back = load_fcm(decode_container(encode_container(c)));
  EXPECT_EQ(back.centroids, model.centroids);
  EXPECT_EQ(back.m, model.m);
  ASSERT_TRUE(back.reducer.has_value());
  EXPECT_EQ(back.reducer->apply(e, flops), model.reducer->apply(e, flops));
}

}  // namespace
}  // namespace gennape

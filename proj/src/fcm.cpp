// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gennape/error.hpp"
#include "gennape/rng.hpp"

namespace gennape {
namespace {

constexpr double kMinStd = 1e-12;
constexpr double kMinEigen = 1e-12;

std::pair<double, double> mean_std(const Eigen::Ref<const Vector>& v) {
  const double mean = v.mean();
  const double var = (v.array() - mean).square().mean();
  return {mean, std::sqrt(var)};
}

// Squared distances from every row of x to every centroid.
Matrix squared_distances(const Matrix& x, const Matrix& v) {
  Matrix d(x.rows(), v.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.rows(); ++k) d(i, k) = (x.row(i) - v.row(k)).squaredNorm();
  }
  return d;
}

RowVector membership_row(const Eigen::Ref<const RowVector>& d2, double m) {
  const Eigen::Index c = d2.size();
  RowVector u = RowVector::Zero(c);
  for (Eigen::Index k = 0; k < c; ++k) {
    if (d2(k) == 0.0) {
      u(k) = 1.0;
      return u;
    }
  }
  // U_k = 1 / sum_j (d_k^2 / d_j^2)^(1/(m-1)), evaluated relative to the
  // nearest centroid to stay in range.
  const double e = 1.0 / (m - 1.0);
  const double nearest = d2.minCoeff();
  RowVector w(c);
  for (Eigen::Index k = 0; k < c; ++k) w(k) = std::pow(nearest / d2(k), e);
  return w / w.sum();
}

Matrix memberships_from_distances(const Matrix& d2, double m) {
  Matrix u(d2.rows(), d2.cols());
  for (Eigen::Index i = 0; i < d2.rows(); ++i) u.row(i) = membership_row(d2.row(i), m);
  return u;
}

Matrix centroids_from_memberships(const Matrix& x, const Matrix& u, double m) {
  const Matrix w = u.array().pow(m).matrix();
  Matrix v = w.transpose() * x;
  for (Eigen::Index k = 0; k < v.rows(); ++k) v.row(k) /= w.col(k).sum();
  return v;
}

// Seeded D^2 sampling of distinct rows.
Matrix init_centroids(const Matrix& x, int clusters, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> chosen{rng.below(n)};
  std::vector<bool> used(n, false);
  used[chosen[0]] = true;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < static_cast<std::size_t>(clusters)) {
    const auto last = static_cast<Eigen::Index>(chosen.back());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], (x.row(static_cast<Eigen::Index>(i)) - x.row(last)).squaredNorm());
      if (!used[i]) total += best[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i] || best[i] == 0.0) continue;
        pick = i;
        r -= best[i];
        if (r < 0.0) break;
      }
    }
    if (pick == n) {
      // Every remaining point coincides with a chosen one.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!used[i]) free.push_back(i);
      }
      pick = free[rng.below(free.size())];
    }
    used[pick] = true;
    chosen.push_back(pick);
  }
  Matrix v(clusters, x.cols());
  for (int k = 0; k < clusters; ++k) v.row(k) = x.row(static_cast<Eigen::Index>(chosen[static_cast<std::size_t>(k)]));
  return v;
}

}  // namespace

Matrix FeatureReducer::standardize(const Matrix& embeddings) const {
  Matrix out(embeddings.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto d = static_cast<std::size_t>(kept[j]);
    out.col(static_cast<Eigen::Index>(j)) =
        (embeddings.col(kept[j]).array() - mean[d]) / stddev[d];
  }
  return out;
}

Matrix FeatureReducer::apply(const Matrix& embeddings, std::span<const double> flops_g) const {
  if (static_cast<std::size_t>(embeddings.rows()) != flops_g.size()) {
    throw MismatchedLengths("embeddings and FLOPs differ in length");
  }
  if (static_cast<std::size_t>(embeddings.cols()) != mean.size()) {
    throw MismatchedLengths("embedding width does not match the fitted reducer");
  }
  Matrix projected = standardize(embeddings) * basis;
  for (Eigen::Index j = 0; j < projected.cols(); ++j) {
    projected.col(j) /= std::sqrt(eigenvalues[static_cast<std::size_t>(j)]);
  }
  Matrix out(embeddings.rows(), output_dim());
  out.leftCols(projected.cols()) = projected;
  if (flops_kept) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      out(i, projected.cols()) = (flops_g[static_cast<std::size_t>(i)] - flops_mean) / flops_std;
    }
  }
  return out;
}

FeatureReducer fit_reducer(const Matrix& embeddings, std::span<const double> flops_g, int components,
                           std::vector<std::string>* warnings) {
  if (embeddings.rows() == 0) throw EmptyInput("no embeddings to reduce");
  if (static_cast<std::size_t>(embeddings.rows()) != flops_g.size()) {
    throw MismatchedLengths("embeddings and FLOPs differ in length");
  }
  const auto warn = [&](const std::string& w) {
    if (warnings) warnings->push_back(w);
  };
  FeatureReducer r;
  for (Eigen::Index d = 0; d < embeddings.cols(); ++d) {
    auto [mu, sd] = mean_std(embeddings.col(d));
    r.mean.push_back(mu);
    r.stddev.push_back(sd);
    if (sd < kMinStd) {
      warn("DegenerateVariance: embedding dimension " + std::to_string(d) + " dropped");
    } else {
      r.kept.push_back(static_cast<int>(d));
    }
  }
  const Vector f = Eigen::Map<const Vector>(flops_g.data(), static_cast<Eigen::Index>(flops_g.size()));
  auto [fmu, fsd] = mean_std(f);
  r.flops_mean = fmu;
  r.flops_std = fsd;
  if (fsd < kMinStd) {
    r.flops_kept = false;
    r.flops_std = 1.0;
    warn("DegenerateVariance: FLOPs dimension dropped");
  }

  const Matrix z = r.standardize(embeddings);
  const auto k = static_cast<Eigen::Index>(r.kept.size());
  r.basis = Matrix(k, 0);
  if (k > 0) {
    const Matrix cov = z.transpose() * z / static_cast<double>(z.rows());
    const SymmetricEigen eig = symmetric_eigen(cov);
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = k - 1; j >= 0 && static_cast<int>(cols.size()) < components; --j) {
      if (eig.values(j) < kMinEigen) break;
      cols.push_back(j);
    }
    r.basis = Matrix(k, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      Vector v = eig.vectors.col(cols[c]);
      Eigen::Index arg;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;  // sign convention for reproducible features
      r.basis.col(static_cast<Eigen::Index>(c)) = v;
      r.eigenvalues.push_back(eig.values(cols[c]));
    }
  }
  if (r.output_dim() == 0) throw DegenerateVariance("every feature dimension has zero variance");
  return r;
}

Matrix embedding_matrix(std::span<const Embedding> embeddings) {
  if (embeddings.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(embeddings.size()), embeddings[0].h.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = embeddings[i].h.transpose();
  return m;
}

double fcm_objective(const Matrix& features, const Matrix& u, const Matrix& centroids, double m) {
  return (u.array().pow(m) * squared_distances(features, centroids).array()).sum();
}

FcmModel fcm_fit(const Matrix& features, int clusters, double m, std::uint64_t seed, const FcmOptions& options) {
  if (features.rows() == 0) throw EmptyInput("no features to cluster");
  if (!(m > 1.0)) throw InvalidFuzzifier("fuzzifier m must exceed 1, got " + std::to_string(m));
  if (clusters < 1 || clusters > features.rows()) {
    throw std::invalid_argument("cluster count must lie in [1, N]");
  }
  // Canonical row order so the fit does not depend on input order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(features.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      if (features(a, c) != features(b, c)) return features(a, c) < features(b, c);
    }
    return false;
  });
  Matrix x(features.rows(), features.cols());
  for (std::size_t i = 0; i < order.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = features.row(order[i]);

  FcmModel model;
  model.clusters = clusters;
  model.m = m;
  model.epsilon = options.epsilon;
  model.max_iterations = options.max_iterations;

  Matrix v = init_centroids(x, clusters, seed);
  Matrix u = memberships_from_distances(squared_distances(x, v), m);
  double prev = fcm_objective(x, u, v, m);
  model.objective.push_back(prev);
  for (int it = 1; it <= options.max_iterations; ++it) {
    v = centroids_from_memberships(x, u, m);
    Matrix next = memberships_from_distances(squared_distances(x, v), m);
    const double delta = (next - u).cwiseAbs().maxCoeff();
    u = std::move(next);
    const double obj = fcm_objective(x, u, v, m);
    if (obj > prev + 1e-10 * std::max(1.0, std::abs(prev))) model.objective_monotone = false;
    model.objective.push_back(obj);
    prev = obj;
    model.iterations = it;
    if (delta <= options.epsilon) {
      model.converged = true;
      break;
    }
  }
  model.centroids = std::move(v);
  return model;
}

Vector fcm_membership(const Vector& x, const FcmModel& model) {
  RowVector d2(model.centroids.rows());
  for (Eigen::Index k = 0; k < model.centroids.rows(); ++k) {
    d2(k) = (model.centroids.row(k) - x.transpose()).squaredNorm();
  }
  return membership_row(d2, model.m).transpose();
}

Matrix fcm_memberships(const Matrix& features, const FcmModel& model) {
  return memberships_from_distances(squared_distances(features, model.centroids), model.m);
}

GridResult grid_search(const Matrix& features, std::uint64_t seed, const GridScorer& scorer,
                       const std::vector<int>& clusters, const std::vector<double>& fuzzifiers,
                       const FcmOptions& options) {
  GridResult result;
  std::optional<double> best;
  for (int c : clusters) {
    for (double m : fuzzifiers) {
      GridCell cell{c, m, std::nullopt, {}};
      try {
        FcmModel model = fcm_fit(features, c, m, derive_seed(seed, {static_cast<std::uint64_t>(c),
                                                                    static_cast<std::uint64_t>(std::lround(m * 1000))}),
                                 options);
        const double score = scorer(model);
        if (!std::isfinite(score)) throw std::runtime_error("non-finite score");
        cell.score = score;
        const bool better = !best || score > *best ||
                            (score == *best && (c < result.clusters || (c == result.clusters && m < result.m)));
        if (better) {
          best = score;
          result.clusters = c;
          result.m = m;
          result.model = std::move(model);
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      result.cells.push_back(std::move(cell));
    }
  }
  if (!best) throw EmptyInput("every grid cell failed");
  return result;
}

void save_fcm(TensorContainer& c, const FcmModel& model) {
  c.add_scalar("FCM/clusters", model.clusters);
  c.add_scalar("FCM/m", model.m);
  c.add_scalar("FCM/epsilon", model.epsilon);
  c.add_scalar("FCM/max_iterations", model.max_iterations);
  c.add_matrix("FCM/centroids", model.centroids);
  c.add_scalar("FCM/has_reducer", model.reducer ? 1.0 : 0.0);
  if (model.reducer) {
    const auto& r = *model.reducer;
    c.add_vector("FCM/reducer/mean", r.mean);
    c.add_vector("FCM/reducer/std", r.stddev);
    c.add_vector("FCM/reducer/kept", std::vector<double>(r.kept.begin(), r.kept.end()));
    c.add_matrix("FCM/reducer/basis", r.basis);
    c.add_vector("FCM/reducer/eigenvalues", r.eigenvalues);
    c.add_scalar("FCM/reducer/flops_mean", r.flops_mean);
    c.add_scalar("FCM/reducer/flops_std", r.flops_std);
    c.add_scalar("FCM/reducer/flops_kept", r.flops_kept ? 1.0 : 0.0);
  }
}

FcmModel load_fcm(const TensorContainer& c) {
  FcmModel model;
  model.clusters = static_cast<int>(c.scalar("FCM/clusters"));
  model.m = c.scalar("FCM/m");
  model.epsilon = c.scalar("FCM/epsilon");
  model.max_iterations = static_cast<int>(c.scalar("FCM/max_iterations"));
  model.centroids = c.matrix("FCM/centroids");
  if (c.scalar("FCM/has_reducer") != 0.0) {
    FeatureReducer r;
    r.mean = c.vector("FCM/reducer/mean");
    r.stddev = c.vector("FCM/reducer/std");
    for (double k : c.vector("FCM/reducer/kept")) r.kept.push_back(static_cast<int>(k));
    r.basis = c.matrix("FCM/reducer/basis");
    r.eigenvalues = c.vector("FCM/reducer/eigenvalues");
    r.flops_mean = c.scalar("FCM/reducer/flops_mean");
    r.flops_std = c.scalar("FCM/reducer/flops_std");
    r.flops_kept = c.scalar("FCM/reducer/flops_kept") != 0.0;
    model.reducer = std::move(r);
  }
  return model;
}

}  // namespace gennape

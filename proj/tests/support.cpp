// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <unistd.h>

namespace gennape::testing {

std::vector<double> jacobi_eigenvalues(Matrix a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<double> brute_membership(const Vector& x, const Matrix& centroids, double m) {
  const auto c = static_cast<std::size_t>(centroids.rows());
  std::vector<double> d(c);
  for (std::size_t k = 0; k < c; ++k) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double diff = x[j] - centroids(static_cast<Eigen::Index>(k), j);
      s += diff * diff;
    }
    d[k] = std::sqrt(s);
  }
  std::vector<double> u(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    if (d[k] == 0.0) {
      u[k] = 1.0;
      return u;
    }
  }
  for (std::size_t k = 0; k < c; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::pow(d[k] / d[j], 2.0 / (m - 1.0));
    u[k] = 1.0 / s;
  }
  return u;
}

std::vector<double> brute_ranks(std::span<const double> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return r;
}

double brute_srcc(std::span<const double> a, std::span<const double> b) {
  const auto ra = brute_ranks(a), rb = brute_ranks(b);
  // Pearson on doubled ranks with exact integer moments.
  const auto n = static_cast<__int128>(ra.size());
  __int128 sab = 0, saa = 0, sbb = 0, sa = 0, sb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const auto x = static_cast<__int128>(2 * ra[i]);
    const auto y = static_cast<__int128>(2 * rb[i]);
    sa += x, sb += y, sab += x * y, saa += x * x, sbb += y * y;
  }
  return static_cast<double>(n * sab - sa * sb) /
         std::sqrt(static_cast<double>(n * saa - sa * sa) * static_cast<double>(n * sbb - sb * sb));
}

double brute_kendall(std::span<const double> a, std::span<const double> b) {
  long long c2 = 0, d2 = 0, ta2 = 0, tb2 = 0, all2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (i == j) continue;
      ++all2;
      const bool ea = a[i] == a[j], eb = b[i] == b[j];
      ta2 += ea;
      tb2 += eb;
      if (ea || eb) continue;
      if ((a[i] < a[j]) == (b[i] < b[j])) ++c2; else ++d2;
    }
  }
  return static_cast<double>((c2 - d2) / 2) /
         std::sqrt(static_cast<double>((all2 - ta2) / 2) * static_cast<double>((all2 - tb2) / 2));
}

double brute_ndcg(std::span<const double> preds, std::span<const double> labels, std::size_t k) {
  const double lo = *std::min_element(labels.begin(), labels.end());
  const double hi = *std::max_element(labels.begin(), labels.end());
  std::vector<double> rel;
  for (double l : labels) rel.push_back(20.0 * (l - lo) / (hi - lo));
  // Selection by repeated argmax, first index wins ties.
  std::vector<std::size_t> by_pred, by_rel;
  std::vector<bool> used(preds.size(), false), used_rel(preds.size(), false);
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t best = SIZE_MAX, best_rel = SIZE_MAX;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (!used[i] && (best == SIZE_MAX || preds[i] > preds[best])) best = i;
      if (!used_rel[i] && (best_rel == SIZE_MAX || rel[i] > rel[best_rel])) best_rel = i;
    }
    used[best] = used_rel[best_rel] = true;
    by_pred.push_back(best);
    by_rel.push_back(best_rel);
  }
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    dcg += (std::pow(2.0, rel[by_pred[r]]) - 1.0) / std::log2(static_cast<double>(r + 2));
    idcg += (std::pow(2.0, rel[by_rel[r]]) - 1.0) / std::log2(static_cast<double>(r + 2));
  }
  return dcg / idcg;
}

GradCheck check_gradients(ParamSet& params, const std::vector<Matrix>& analytic,
                          const std::function<double()>& loss, int samples, std::uint64_t seed, double h) {
  GradCheck out;
  Rng rng(seed);
  const auto central = [&](double& x, double step) {
    const double x0 = x;
    x = x0 + step;
    const double up = loss();
    x = x0 - step;
    const double down = loss();
    x = x0;
    return (up - down) / (2.0 * step);
  };
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& w = params[p];
    const int count = std::min<int>(samples, static_cast<int>(w.size()));
    std::set<Eigen::Index> picked;
    while (static_cast<int>(picked.size()) < count) picked.insert(static_cast<Eigen::Index>(rng.below(w.size())));
    for (Eigen::Index flat : picked) {
      double& x = w.data()[flat];
      const double fd = central(x, h);
      const double fd_half = central(x, h / 2);
      const double an = analytic[p].data()[flat];
      const double scale = std::max({std::abs(an), std::abs(fd), 1e-6});
      if (std::abs(fd - fd_half) > 1e-5 * scale + 1e-9) {
        ++out.skipped;
        continue;
      }
      ++out.checked;
      out.max_rel = std::max(out.max_rel, std::abs(an - fd) / scale);
    }
  }
  return out;
}

ComputeGraph small_classifier(const std::string& name) {
  const TensorShape in{8, 8, 3};
  std::vector<NodeAttrs> nodes{make_input(in), make_conv(in, 16, 3, 1, true), make_unary(OpKind::kRelu, {8, 8, 16}),
                               make_global_pool({8, 8, 16}), make_linear(16, 10), make_output({1, 1, 10})};
  return build_graph(std::move(nodes), {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}, name);
}

ComputeGraph chain_graph(int n, const std::string& name) {
  const TensorShape s{4, 4, 2};
  std::vector<NodeAttrs> nodes{make_input(s)};
  std::vector<Edge> edges;
  for (int i = 1; i + 1 < n; ++i) {
    nodes.push_back(make_unary(OpKind::kIdentity, s));
    edges.emplace_back(i - 1, i);
  }
  nodes.push_back(make_output(s));
  edges.emplace_back(n - 2, n - 1);
  return build_graph(std::move(nodes), std::move(edges), name);
}

ComputeGraph permuted(const ComputeGraph& cg, Rng& rng) {
  std::vector<int> perm(cg.size());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::vector<NodeAttrs> nodes(cg.size());
  for (std::size_t i = 0; i < cg.size(); ++i) nodes[static_cast<std::size_t>(perm[i])] = cg.nodes()[i];
  std::vector<Edge> edges;
  for (const auto& [s, d] : cg.edges()) edges.emplace_back(perm[static_cast<std::size_t>(s)], perm[static_cast<std::size_t>(d)]);
  rng.shuffle(edges);
  return build_graph(std::move(nodes), std::move(edges), cg.name());
}

TempDir::TempDir() {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("gennape-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace gennape::testing

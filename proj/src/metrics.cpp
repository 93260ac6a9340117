// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "gennape/error.hpp"

namespace gennape {
namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, std::size_t min_len) {
  if (a.size() != b.size()) {
    throw MismatchedLengths("lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  if (a.size() < min_len) {
    throw MismatchedLengths("need at least " + std::to_string(min_len) + " items, got " + std::to_string(a.size()));
  }
}

int sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

double mae(std::span<const double> preds, std::span<const double> labels) {
  check_lengths(preds, labels, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - labels[i]);
  return s / static_cast<double>(preds.size());
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double srcc(std::span<const double> preds, std::span<const double> labels) {
  check_lengths(preds, labels, 2);
  // Doubled average ranks are integers, so the moment sums are exact.
  const auto rp = average_ranks(preds);
  const auto rl = average_ranks(labels);
  const auto n = static_cast<__int128>(rp.size());
  __int128 sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    const auto x = static_cast<__int128>(std::llround(2.0 * rp[i]));
    const auto y = static_cast<__int128>(std::llround(2.0 * rl[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const __int128 cov = n * sxy - sx * sy;
  const __int128 vx = n * sxx - sx * sx;
  const __int128 vy = n * syy - sy * sy;
  if (vx == 0 || vy == 0) throw ConstantInput("rank correlation undefined for constant input");
  return static_cast<double>(cov) / std::sqrt(static_cast<double>(vx) * static_cast<double>(vy));
}

double kendall_tau(std::span<const double> preds, std::span<const double> labels) {
  check_lengths(preds, labels, 2);
  // Integer pair counts keep the result exact for brute-force comparison.
  long long concordant = 0, discordant = 0, tie_p = 0, tie_l = 0;
  const std::size_t n = preds.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int a = sign(preds[i] - preds[j]);
      const int b = sign(labels[i] - labels[j]);
      if (a == 0) ++tie_p;
      if (b == 0) ++tie_l;
      if (a != 0 && b != 0) (a == b ? concordant : discordant) += 1;
    }
  }
  const long long pairs = static_cast<long long>(n * (n - 1) / 2);
  const long long np = pairs - tie_p;
  const long long nl = pairs - tie_l;
  if (np == 0 || nl == 0) throw ConstantInput("Kendall tau undefined for constant input");
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(np) * static_cast<double>(nl));
}

std::vector<double> ndcg_relevance(std::span<const double> labels) {
  if (labels.empty()) throw DegenerateLabels("no labels");
  const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
  if (*lo == *hi) throw DegenerateLabels("all labels are equal");
  std::vector<double> rel;
  rel.reserve(labels.size());
  for (double l : labels) rel.push_back(l == *hi ? 20.0 : 20.0 * (l - *lo) / (*hi - *lo));
  return rel;
}

double ndcg_at_k(std::span<const double> preds, std::span<const double> labels, std::size_t k) {
  check_lengths(preds, labels, 1);
  if (k == 0 || k > preds.size()) throw std::invalid_argument("k must lie in [1, N]");
  const auto rel = ndcg_relevance(labels);
  const auto dcg = [&](std::vector<std::size_t> order) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += (std::exp2(rel[order[i]]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    return s;
  };
  std::vector<std::size_t> by_pred(preds.size());
  std::iota(by_pred.begin(), by_pred.end(), 0);
  std::stable_sort(by_pred.begin(), by_pred.end(), [&](std::size_t a, std::size_t b) { return preds[a] > preds[b]; });
  std::vector<std::size_t> ideal(preds.size());
  std::iota(ideal.begin(), ideal.end(), 0);
  std::stable_sort(ideal.begin(), ideal.end(), [&](std::size_t a, std::size_t b) { return rel[a] > rel[b]; });
  return dcg(by_pred) / dcg(ideal);
}

std::vector<std::size_t> rank_via_comparator(std::size_t n, const Comparator& before, std::size_t* calls) {
  std::vector<std::size_t> a(n), buf(n);
  std::iota(a.begin(), a.end(), 0);
  std::size_t count = 0;
  // Bottom-up passes: widths 1, 2, 4, ...; each merge is stable (left wins ties).
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, o = lo;
      while (i < mid && j < hi) {
        ++count;
        buf[o++] = before(a[j], a[i]) ? a[j++] : a[i++];
      }
      while (i < mid) buf[o++] = a[i++];
      while (j < hi) buf[o++] = a[j++];
    }
    a.swap(buf);
  }
  if (calls) *calls = count;
  return a;
}

std::vector<double> positions_as_scores(const std::vector<std::size_t>& ascending) {
  std::vector<double> s(ascending.size());
  for (std::size_t p = 0; p < ascending.size(); ++p) s[ascending[p]] = static_cast<double>(p);
  return s;
}

RankingReport ranking_report(std::span<const double> preds, std::span<const double> labels,
                             const std::vector<std::size_t>& ks) {
  RankingReport r;
  r.mae = mae(preds, labels);
  r.srcc = srcc(preds, labels);
  r.kendall_tau = kendall_tau(preds, labels);
  for (std::size_t k : ks) {
    if (k <= preds.size()) r.ndcg[k] = ndcg_at_k(preds, labels, k);
  }
  return r;
}

std::string report_json(const RankingReport& r) {
  nlohmann::ordered_json j;
  j["mae"] = r.mae;
  j["srcc"] = r.srcc;
  j["kt"] = r.kendall_tau;
  j["ndcg"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.ndcg) j["ndcg"][std::to_string(k)] = v;
  return j.dump();
}

}  // namespace gennape

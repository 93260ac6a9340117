// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gennape {

/// Mean absolute error. Throws MismatchedLengths (also for empty input).
double mae(std::span<const double> preds, std::span<const double> labels);

/// Fractional ranks starting at 1; ties share their average rank.
std::vector<double> average_ranks(std::span<const double> v);

/// Spearman correlation: Pearson of average ranks. Throws ConstantInput when
/// either side has no rank variance, MismatchedLengths on bad sizes.
double srcc(std::span<const double> preds, std::span<const double> labels);

/// Kendall tau-b. Throws ConstantInput / MismatchedLengths.
double kendall_tau(std::span<const double> preds, std::span<const double> labels);

/// Labels affinely mapped to [0, 20]. Throws DegenerateLabels when constant.
std::vector<double> ndcg_relevance(std::span<const double> labels);

/// NDCG@k with exponential gain over rescaled relevance; prediction ties are
/// broken by original index.
double ndcg_at_k(std::span<const double> preds, std::span<const double> labels, std::size_t k);

/// Returns true when item a should come before item b.
using Comparator = std::function<bool(std::size_t a, std::size_t b)>;

/// Stable bottom-up mergesort of indices 0..n-1 under `before`. When
/// `calls` is given it receives the comparator call count.
std::vector<std::size_t> rank_via_comparator(std::size_t n, const Comparator& before, std::size_t* calls = nullptr);

/// Per-item score equal to its position in an ascending ordering (0 = worst).
std::vector<double> positions_as_scores(const std::vector<std::size_t>& ascending);

struct RankingReport {
  double mae = 0.0;
  double srcc = 0.0;
  double kendall_tau = 0.0;
  std::map<std::size_t, double> ndcg;
};

/// Evaluates predicted vs. true accuracies (percent). NDCG@k is reported for
/// every requested k not exceeding the list length.
RankingReport ranking_report(std::span<const double> preds, std::span<const double> labels,
                             const std::vector<std::size_t>& ks = {10, 50});

/// {"mae": f, "srcc": f, "kt": f, "ndcg": {"10": f, "50": f}}
std::string report_json(const RankingReport& r);

}  // namespace gennape

// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "gennape/error.hpp"
#include "gennape/graph_io.hpp"

namespace gennape {

Matrix normalized_laplacian(const Matrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  Vector inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double deg = adjacency.row(i).sum();
    inv_sqrt_deg[i] = deg > 0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (inv_sqrt_deg[i] > 0) l(i, i) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && adjacency(i, j) != 0.0) {
        l(i, j) = -adjacency(i, j) * inv_sqrt_deg[i] * inv_sqrt_deg[j];
      }
    }
  }
  return l;
}

Matrix normalized_laplacian(const ComputeGraph& cg) { return normalized_laplacian(undirected_adjacency(cg)); }

SpectralSignature signature_from_adjacency(const Matrix& adjacency, int q) {
  EigenOptions opt;
  opt.compute_vectors = false;
  const auto eig = symmetric_eigen(normalized_laplacian(adjacency), opt);
  SpectralSignature sig;
  sig.eigenvalues.assign(static_cast<std::size_t>(q), kSpectralPad);
  const auto take = std::min<Eigen::Index>(q, eig.values.size());
  for (Eigen::Index k = 0; k < take; ++k) {
    // Clamp round-off into the spectral range and snap the endpoints.
    double v = std::clamp(eig.values[k], 0.0, kSpectralPad);
    if (v < 1e-12) v = 0.0;
    if (kSpectralPad - v < 1e-12) v = kSpectralPad;
    sig.eigenvalues[static_cast<std::size_t>(k)] = v;
  }
  std::sort(sig.eigenvalues.begin(), sig.eigenvalues.end());
  return sig;
}

SpectralSignature signature(const ComputeGraph& cg, int q) {
  return signature_from_adjacency(undirected_adjacency(cg), q);
}

double spectral_distance(const SpectralSignature& a, const SpectralSignature& b) {
  if (a.eigenvalues.size() != b.eigenvalues.size()) {
    throw MismatchedLengths("signatures of length " + std::to_string(a.eigenvalues.size()) +
                            " and " + std::to_string(b.eigenvalues.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.eigenvalues.size(); ++k) {
    const double d = a.eigenvalues[k] - b.eigenvalues[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double spectral_distance(const ComputeGraph& a, const ComputeGraph& b, int q) {
  return spectral_distance(signature(a, q), signature(b, q));
}

std::vector<double> alpha_weights(std::span<const SpectralSignature> batch, std::size_t i, int sign) {
  const std::size_t n = batch.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < n; ++l) {
    if (l == i) continue;
    w[l] = sign * spectral_distance(batch[i], batch[l]);
    peak = std::max(peak, w[l]);
  }
  double total = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    if (l == i) continue;
    w[l] = std::exp(w[l] - peak);
    total += w[l];
  }
  for (std::size_t l = 0; l < n; ++l) w[l] /= total;
  w[i] = 0.0;
  return w;
}

void write_signature_cache(const std::filesystem::path& path, const std::vector<NamedSignature>& sigs) {
  std::string out;
  for (const auto& s : sigs) {
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["sig"] = s.sig.eigenvalues;
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<NamedSignature> read_signature_cache(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<NamedSignature> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    if (!line.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(pos + (e.byte > 0 ? e.byte - 1 : 0), e.what());
      }
      if (!j.contains("name") || !j.contains("sig") || !j["sig"].is_array()) {
        throw ParseError(pos, "signature cache line missing 'name' or 'sig'");
      }
      out.push_back({j["name"].get<std::string>(), {j["sig"].get<std::vector<double>>()}});
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace gennape

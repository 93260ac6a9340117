// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gennape/compute_graph.hpp"
#include "gennape/linalg.hpp"

namespace gennape {

inline constexpr int kSignatureLength = 21;
/// Upper bound of the normalized Laplacian spectrum; used to pad short spectra.
inline constexpr double kSpectralPad = 2.0;

/// q smallest normalized-Laplacian eigenvalues, ascending, each in [0, 2].
struct SpectralSignature {
  std::vector<double> eigenvalues;
  friend bool operator==(const SpectralSignature&, const SpectralSignature&) = default;
};

/// L = I - D^-1/2 A D^-1/2 over the undirected skeleton. Rows and columns of
/// isolated nodes are zero.
Matrix normalized_laplacian(const Matrix& adjacency);
Matrix normalized_laplacian(const ComputeGraph& cg);

/// Pads with 2.0 when the graph has fewer than q nodes.
SpectralSignature signature_from_adjacency(const Matrix& adjacency, int q = kSignatureLength);
SpectralSignature signature(const ComputeGraph& cg, int q = kSignatureLength);

/// Euclidean distance between signatures of equal length.
double spectral_distance(const SpectralSignature& a, const SpectralSignature& b);
double spectral_distance(const ComputeGraph& a, const ComputeGraph& b, int q = kSignatureLength);

/// Contrastive pair weights for batch entry i: softmax over l != i of
/// sign * sigma(i, l). The returned vector spans the whole batch with a zero
/// at position i. sign is +1 (default reading) or -1.
std::vector<double> alpha_weights(std::span<const SpectralSignature> batch, std::size_t i, int sign = +1);

/// Optional cache, JSON-lines {"name": str, "sig": [floats]}.
struct NamedSignature {
  std::string name;
  SpectralSignature sig;
};
void write_signature_cache(const std::filesystem::path& path, const std::vector<NamedSignature>& sigs);
std::vector<NamedSignature> read_signature_cache(const std::filesystem::path& path);

}  // namespace gennape

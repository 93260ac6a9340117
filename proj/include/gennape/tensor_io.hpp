// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gennape/linalg.hpp"
#include "gennape/nn.hpp"

namespace gennape {

// Binary tensor container shared by every persisted model:
//
//   "GNPE" | u32 version | u32 tensor count |
//   per tensor: u32 name length, name bytes, u32 rank, u64 dims[rank], f64 data[]
//   | u64 FNV-1a checksum of all preceding bytes
//
// All integers and floats are little-endian. Sections are expressed as name
// prefixes ("ENCODER/", "FCM/", ...).

inline constexpr std::uint32_t kContainerVersion = 1;

struct Tensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

class TensorContainer {
 public:
  void add(Tensor t) { tensors_.push_back(std::move(t)); }
  void add_matrix(const std::string& name, const Matrix& m);
  void add_scalar(const std::string& name, double v);
  void add_vector(const std::string& name, const std::vector<double>& v);
  /// Every parameter as "<section>/<param name>".
  void add_params(const std::string& section, const ParamSet& params);

  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  Matrix matrix(const std::string& name) const;
  double scalar(const std::string& name) const;
  std::vector<double> vector(const std::string& name) const;
  /// Overwrite every parameter of `params` from "<section>/<name>"; shapes must match.
  void load_params(const std::string& section, ParamSet& params) const;

  const std::vector<Tensor>& tensors() const { return tensors_; }

 private:
  std::vector<Tensor> tensors_;
};

std::string encode_container(const TensorContainer& c, std::uint32_t version = kContainerVersion);
/// Throws ParseError, VersionMismatch or ChecksumError.
TensorContainer decode_container(std::string_view bytes);

void save_container(const std::filesystem::path& path, const TensorContainer& c);
TensorContainer load_container(const std::filesystem::path& path);

}  // namespace gennape

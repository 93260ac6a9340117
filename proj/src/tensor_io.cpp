// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/tensor_io.hpp"

#include <bit>
#include <cstring>

#include "gennape/error.hpp"
#include "gennape/graph_io.hpp"
#include "gennape/rng.hpp"

namespace gennape {
namespace {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw ParseError(pos_, "truncated container");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void TensorContainer::add_matrix(const std::string& name, const Matrix& m) {
  Tensor t{name, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
  t.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
  }
  tensors_.push_back(std::move(t));
}

void TensorContainer::add_scalar(const std::string& name, double v) { tensors_.push_back({name, {}, {v}}); }

void TensorContainer::add_vector(const std::string& name, const std::vector<double>& v) {
  tensors_.push_back({name, {static_cast<std::uint64_t>(v.size())}, v});
}

void TensorContainer::add_params(const std::string& section, const ParamSet& params) {
  for (std::size_t i = 0; i < params.size(); ++i) add_matrix(section + "/" + params.name(i), params[i]);
}

bool TensorContainer::has(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return true;
  }
  return false;
}

const Tensor& TensorContainer::get(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw ParseError(0, "container has no tensor '" + name + "'");
}

Matrix TensorContainer::matrix(const std::string& name) const {
  const Tensor& t = get(name);
  if (t.dims.size() != 2) throw ParseError(0, "tensor '" + name + "' is not rank 2");
  Matrix m(static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[k++];
  }
  return m;
}

double TensorContainer::scalar(const std::string& name) const {
  const Tensor& t = get(name);
  if (t.data.size() != 1) throw ParseError(0, "tensor '" + name + "' is not a scalar");
  return t.data[0];
}

std::vector<double> TensorContainer::vector(const std::string& name) const { return get(name).data; }

void TensorContainer::load_params(const std::string& section, ParamSet& params) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix m = matrix(section + "/" + params.name(i));
    if (m.rows() != params[i].rows() || m.cols() != params[i].cols()) {
      throw ParseError(0, "shape mismatch for '" + section + "/" + params.name(i) + "'");
    }
    params[i] = std::move(m);
  }
}

std::string encode_container(const TensorContainer& c, std::uint32_t version) {
  std::string out = "GNPE";
  put<std::uint32_t>(out, version);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.tensors().size()));
  for (const auto& t : c.tensors()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put<std::uint64_t>(out, d);
    for (double v : t.data) put<double>(out, v);
  }
  put<std::uint64_t>(out, fnv1a(out));
  return out;
}

TensorContainer decode_container(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4) != "GNPE") throw ParseError(0, "bad magic, expected GNPE");
  const auto version = r.get<std::uint32_t>();
  if (version != kContainerVersion) {
    throw VersionMismatch("container version " + std::to_string(version) + ", supported " +
                          std::to_string(kContainerVersion));
  }
  if (bytes.size() < 16) throw ParseError(bytes.size(), "truncated container");
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  if (fnv1a(body) != stored) throw ChecksumError("container checksum does not match contents");

  Reader br(body);
  br.take(8);
  const auto count = br.get<std::uint32_t>();
  TensorContainer c;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    const auto name_len = br.get<std::uint32_t>();
    t.name = std::string(br.take(name_len));
    const auto rank = br.get<std::uint32_t>();
    std::uint64_t elems = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      t.dims.push_back(br.get<std::uint64_t>());
      elems *= t.dims.back();
    }
    if (elems > br.remaining() / 8) throw ParseError(br.pos(), "tensor '" + t.name + "' overruns the file");
    t.data.reserve(static_cast<std::size_t>(elems));
    for (std::uint64_t k = 0; k < elems; ++k) t.data.push_back(br.get<double>());
    c.add(std::move(t));
  }
  if (br.remaining() != 0) throw ParseError(br.pos(), "trailing bytes after last tensor");
  return c;
}

void save_container(const std::filesystem::path& path, const TensorContainer& c) {
  write_file(path, encode_container(c));
}

TensorContainer load_container(const std::filesystem::path& path) { return decode_container(read_file(path)); }

}  // namespace gennape

// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gennape {

/// Base of every error raised by the library. `name()` is the stable error
/// identifier printed verbatim by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define GENNAPE_DEFINE_ERROR(Type)                                  \
  class Type : public Error {                                       \
   public:                                                          \
    explicit Type(const std::string& what) : Error(#Type, what) {}  \
  }

// compute_graph
GENNAPE_DEFINE_ERROR(CycleError);
GENNAPE_DEFINE_ERROR(ShapeMismatch);
GENNAPE_DEFINE_ERROR(TopologyError);
GENNAPE_DEFINE_ERROR(ValidationError);

// spectral
GENNAPE_DEFINE_ERROR(EigenConvergenceError);

// encoder / predictor training
GENNAPE_DEFINE_ERROR(DegenerateProjection);
GENNAPE_DEFINE_ERROR(InsufficientSamples);

// fcm
GENNAPE_DEFINE_ERROR(EmptyInput);
GENNAPE_DEFINE_ERROR(InvalidFuzzifier);
GENNAPE_DEFINE_ERROR(DegenerateVariance);

// metrics
GENNAPE_DEFINE_ERROR(MismatchedLengths);
GENNAPE_DEFINE_ERROR(ConstantInput);
GENNAPE_DEFINE_ERROR(DegenerateLabels);

// search / families
GENNAPE_DEFINE_ERROR(EmptyFrontier);
GENNAPE_DEFINE_ERROR(GenerationExhausted);

// persistence
GENNAPE_DEFINE_ERROR(VersionMismatch);
GENNAPE_DEFINE_ERROR(ChecksumError);

#undef GENNAPE_DEFINE_ERROR

/// Malformed serialized input. Carries the byte offset where decoding failed.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& reason)
      : Error("ParseError", "at byte " + std::to_string(offset) + ": " + reason),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Training produced a NaN/Inf loss.
class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(std::size_t batch)
      : Error("NonFiniteLoss", "non-finite loss at batch " + std::to_string(batch)),
        batch_(batch) {}
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t batch_;
};

}  // namespace gennape

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adagpr {

enum class ErrorCode {
  kStructural,      // node id out of range, malformed CSR
  kEmptyGraph,
  kDimension,       // shape mismatch
  kInvalidOrder,    // GPR order K = 0
  kSymmetry,
  kParameter,       // out-of-range hyperparameter
  kDegenerateLoss,  // empty mask
  kContract,        // API misuse (non-scalar root, double backward, ...)
  kNumeric,         // non-finite input
  kInvariant,       // internal invariant violation
  kSplit,
  kInput,           // invalid bound input / missing data
  kIo,              // missing or malformed file
  kConfig,
  kTrainingFailure,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every library failure. The code lets callers (the CLI
/// in particular) map failures to exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by fit() when the training loss becomes non-finite.
class TrainingDivergence : public Error {
 public:
  TrainingDivergence(std::size_t epoch, double loss);

  [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }
  [[nodiscard]] double loss() const noexcept { return loss_; }

 private:
  std::size_t epoch_;
  double loss_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0

#include "adagpr/error.hpp"

#include <cstdio>

namespace adagpr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kStructural: return "structural error";
    case ErrorCode::kEmptyGraph: return "empty graph";
    case ErrorCode::kDimension: return "dimension error";
    case ErrorCode::kInvalidOrder: return "invalid order";
    case ErrorCode::kSymmetry: return "symmetry error";
    case ErrorCode::kParameter: return "parameter error";
    case ErrorCode::kDegenerateLoss: return "degenerate loss";
    case ErrorCode::kContract: return "contract error";
    case ErrorCode::kNumeric: return "numeric error";
    case ErrorCode::kInvariant: return "invariant violation";
    case ErrorCode::kSplit: return "split error";
    case ErrorCode::kInput: return "input error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kTrainingFailure: return "training failure";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {
std::string divergence_message(std::size_t epoch, double loss) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "non-finite loss %g at epoch %zu", loss, epoch);
  return buf;
}
}  // namespace

TrainingDivergence::TrainingDivergence(std::size_t epoch, double loss)
    : Error(ErrorCode::kTrainingFailure, divergence_message(epoch, loss)),
      epoch_(epoch),
      loss_(loss) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace adagpr

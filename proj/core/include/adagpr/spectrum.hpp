// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "adagpr/graph.hpp"

namespace adagpr {

enum class SpectrumMethod { kDense, kLanczosTruncated };

std::string_view to_string(SpectrumMethod method);

/// Eigenvalues of a symmetric matrix, sorted descending.
struct Spectrum {
  std::vector<double> eigenvalues;
  SpectrumMethod method = SpectrumMethod::kDense;
  /// Order of the matrix the spectrum belongs to.
  std::size_t dimension = 0;
  /// Number of eigenvalues actually computed; equals dimension unless truncated.
  std::size_t truncation_count = 0;

  [[nodiscard]] bool truncated() const noexcept { return truncation_count < dimension; }
};

enum class SpectrumMode {
  kDense,
  /// Dense up to kAutoDenseLimit nodes, truncated Lanczos above.
  kAuto,
  kLanczos,
};

inline constexpr std::size_t kAutoDenseLimit = 4096;

struct LanczosOptions {
  std::size_t max_steps = 300;
  /// A Ritz value is kept when its residual norm is below tol * max(1, |theta|).
  double tol = 1e-8;
  std::uint64_t seed = 0x5eed;
};

/// Throws kSymmetry when |a_ij - a_ji| > 1e-12 anywhere.
Spectrum compute_spectrum(const SparseMatrix& a, SpectrumMode mode = SpectrumMode::kAuto,
                          const LanczosOptions& options = {});

/// Extremal eigenvalues by Lanczos with full reorthogonalization.
Spectrum lanczos_spectrum(const SparseMatrix& a, const LanczosOptions& options = {});

}  // namespace adagpr

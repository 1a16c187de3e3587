// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adagpr {

/// Euclidean projection of z onto the probability simplex.
///
/// output[i] = max(z[i] - threshold, 0); support lists the indices with a
/// strictly positive output, in ascending index order.
struct SparsemaxResult {
  std::vector<double> output;
  std::vector<std::size_t> support;
  double threshold = 0.0;
};

/// Sorts z descending (stable, ties by original index) and takes the largest
/// k with 1 + k·z_(k) > Σ_{j≤k} z_(j). Throws kInvalidOrder for empty input and
/// kNumeric for non-finite entries.
SparsemaxResult sparsemax(std::span<const double> z);

/// J^T · upstream with J = diag(1_S) - 1_S 1_S^T / |S|. Entries off the support are 0.
std::vector<double> sparsemax_backward(const SparsemaxResult& result,
                                       std::span<const double> upstream);

/// GPR coefficients from unconstrained logits: sparsemax(exp(v)).
struct CoeffActivation {
  std::vector<double> exp_logits;
  SparsemaxResult projection;
  /// True when some v_i > kExpClamp and was clamped before exponentiation.
  bool clamped = false;
};

inline constexpr double kExpClamp = 700.0;

CoeffActivation coeff_activation(std::span<const double> logits);

/// d loss / d v given d loss / d mu. Clamped entries get zero gradient.
std::vector<double> coeff_activation_backward(const CoeffActivation& activation,
                                              std::span<const double> logits,
                                              std::span<const double> upstream);

}  // namespace adagpr

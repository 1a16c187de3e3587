// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adagpr/models.hpp"
#include "adagpr/spectrum.hpp"

namespace adagpr {

/// Σ_i Σ_k mu_k |λ_i|^k. Eigenvalues missing from a truncated spectrum count
/// as 0, except in the k = 0 term which always uses the full dimension.
double spectral_sum(const Spectrum& spectrum, std::span<const double> mu);

/// Row k holds Σ_i |λ_i|^k for k = 0..k_max. Needs a full spectrum.
std::vector<double> oversmoothing_profile(const Spectrum& spectrum, std::size_t k_max);

/// Inputs to the transductive complexity expressions for AdaGPR / GCNII.
struct BoundInput {
  Spectrum spectrum;
  /// μ^(1)..μ^(L).
  CoefficientTable coefficients;
  /// μ^(0) for the layer-0 factor of the second sum; defaults to μ^(1).
  std::optional<std::vector<double>> layer0_coefficients;
  std::size_t layers = 1;
  double alpha = 0.1;
  /// B^(0)..B^(L).
  std::vector<double> weight_bounds;
  double output_bound = 1.0;  // R
  std::size_t train_size = 1;  // M
  std::size_t test_size = 1;   // U
  double feature_norm = 1.0;   // ||X||_F
  double delta = 0.05;

  void validate() const;
};

struct BoundReport {
  /// s^(l) for l = 0..L (index 0 is the layer-0 factor).
  std::vector<double> spectral_sums;
  /// Term l = 1..L of each summation (index l-1), already including their
  /// outer factors but not Q.
  std::vector<double> first_terms;
  std::vector<double> second_terms;
  double first_sum = 0.0;
  double second_sum = 0.0;
  double q = 0.0;
  double p0_factor = 0.0;  // sqrt(2MU / (M+U)^2)
  double d = 0.0;          // sqrt(N) R
  /// Q (first_sum + second_sum) with the universal constant set to 1.
  double complexity_index = 0.0;
  /// Same scaffolding with every layer at e1 (the GCNII value).
  double gcnii_index = 0.0;
  /// c0 Q sqrt(min(M, U)) with c0 = 1.
  double tail_sampling = 0.0;
  /// sqrt(S Q / 2 · ln(1/δ)).
  double tail_confidence = 0.0;
  double s = 0.0;
};

/// AdaGPR complexity index with layer-specific GPR coefficients.
BoundReport evaluate_theorem1(const BoundInput& input);
/// GCNII specialization: every layer uses Σ_i |λ_i|.
BoundReport evaluate_corollary1(const BoundInput& input);

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0

#include "adagpr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adagpr/error.hpp"

namespace adagpr {

double spectral_sum(const Spectrum& spectrum, std::span<const double> mu) {
  require(!spectrum.eigenvalues.empty() && spectrum.dimension > 0, ErrorCode::kInput,
          "spectral_sum of an empty spectrum");
  require(!mu.empty(), ErrorCode::kInvalidOrder, "spectral_sum needs K >= 1");
  double mass = 0.0;
  for (double m : mu) {
    require(m >= 0.0, ErrorCode::kInput, "coefficients must be non-negative");
    mass += m;
  }
  require(std::abs(mass - 1.0) <= 1e-9, ErrorCode::kInput, "coefficients must sum to 1");
  double total = mu[0] * static_cast<double>(spectrum.dimension);
  for (double lambda : spectrum.eigenvalues) {
    const double magnitude = std::abs(lambda);
    double power = 1.0;
    for (std::size_t k = 1; k < mu.size(); ++k) {
      power *= magnitude;
      total += mu[k] * power;
    }
  }
  return total;
}

std::vector<double> oversmoothing_profile(const Spectrum& spectrum, std::size_t k_max) {
  require(!spectrum.eigenvalues.empty(), ErrorCode::kInput, "profile of an empty spectrum");
  require(!spectrum.truncated(), ErrorCode::kInput,
          "oversmoothing profile needs the full spectrum");
  std::vector<double> rows(k_max + 1, 0.0);
  for (double lambda : spectrum.eigenvalues) {
    const double magnitude = std::min(std::abs(lambda), 1.0);
    double power = 1.0;
    for (std::size_t k = 0; k <= k_max; ++k) {
      rows[k] += power;
      power *= magnitude;
    }
  }
  return rows;
}

void BoundInput::validate() const {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::kInput, "alpha must lie in (0, 1)");
  require(layers >= 1, ErrorCode::kInput, "L must be >= 1");
  require(coefficients.size() >= layers, ErrorCode::kInput,
          "need " + std::to_string(layers) + " coefficient rows, have " +
              std::to_string(coefficients.size()));
  require(weight_bounds.size() == layers + 1, ErrorCode::kInput,
          "need weight bounds B^(0)..B^(L)");
  for (double b : weight_bounds) require(b > 0.0, ErrorCode::kInput, "weight bounds must be > 0");
  require(train_size >= 1 && test_size >= 1, ErrorCode::kInput, "M and U must be >= 1");
  require(output_bound >= 0.0 && feature_norm >= 0.0, ErrorCode::kInput,
          "R and ||X||_F must be >= 0");
  require(delta > 0.0 && delta < 1.0, ErrorCode::kInput, "delta must lie in (0, 1)");
  require(!spectrum.eigenvalues.empty(), ErrorCode::kInput, "empty spectrum");
}

namespace {

BoundReport evaluate(const BoundInput& input, const std::vector<double>& spectral) {
  const std::size_t L = input.layers;
  const double alpha = input.alpha;
  const double m = static_cast<double>(input.train_size);
  const double u = static_cast<double>(input.test_size);
  const auto& B = input.weight_bounds;

  BoundReport r;
  r.spectral_sums = spectral;
  r.q = 1.0 / m + 1.0 / u;
  r.p0_factor = std::sqrt(2.0 * m * u / ((m + u) * (m + u)));
  r.d = std::sqrt(static_cast<double>(input.spectrum.dimension)) * input.output_bound;

  // Running product ∏_{j=0}^{l-1} B^(L-j) s^(L-j).
  double chain = 1.0;
  for (std::size_t l = 1; l <= L; ++l) {
    const std::size_t top = L - (l - 1);
    chain *= B[top] * spectral[top];
    const double depth_scale = std::pow(1.0 - alpha, static_cast<double>(l)) * std::ldexp(1.0, static_cast<int>(l));
    const double first =
        alpha * depth_scale * chain * input.feature_norm * B[0] * r.p0_factor;
    const std::size_t next = L - l;  // j = l factor of the second product
    const double second = (1.0 - alpha) * depth_scale * chain * B[next] * spectral[next] * r.d;
    r.first_terms.push_back(first);
    r.second_terms.push_back(second);
    r.first_sum += first;
    r.second_sum += second;
  }
  r.complexity_index = r.q * (r.first_sum + r.second_sum);

  const double min_mu = std::min(m, u);
  r.tail_sampling = r.q * std::sqrt(min_mu);
  r.s = 2.0 * (m + u) * min_mu / ((2.0 * (m + u) - 1.0) * (2.0 * min_mu - 1.0));
  r.tail_confidence = std::sqrt(r.s * r.q / 2.0 * std::log(1.0 / input.delta));
  return r;
}

}  // namespace

BoundReport evaluate_theorem1(const BoundInput& input) {
  input.validate();
  std::vector<double> spectral(input.layers + 1);
  spectral[0] = spectral_sum(input.spectrum,
                             input.layer0_coefficients ? *input.layer0_coefficients
                                                       : input.coefficients.front());
  for (std::size_t l = 1; l <= input.layers; ++l) {
    spectral[l] = spectral_sum(input.spectrum, input.coefficients[l - 1]);
  }
  BoundReport report = evaluate(input, spectral);
  report.gcnii_index = evaluate_corollary1(input).complexity_index;
  return report;
}

BoundReport evaluate_corollary1(const BoundInput& input) {
  input.validate();
  const double e1[] = {0.0, 1.0};
  BoundReport report =
      evaluate(input, std::vector<double>(input.layers + 1, spectral_sum(input.spectrum, e1)));
  report.gcnii_index = report.complexity_index;
  return report;
}

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0

#include "adagpr/sparsemax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adagpr/error.hpp"

namespace adagpr {

SparsemaxResult sparsemax(std::span<const double> z) {
  const std::size_t dim = z.size();
  require(dim > 0, ErrorCode::kInvalidOrder, "sparsemax of an empty vector");
  for (double v : z) require(std::isfinite(v), ErrorCode::kNumeric, "sparsemax input is not finite");

  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });

  // Work relative to the maximum so that large inputs (exp of big logits)
  // cannot overflow the cumulative sums. Shifting does not change the result.
  const double top = z[order[0]];

  // k(z): the condition holds for a prefix of the sorted order, so the last
  // index satisfying it is the support size.
  std::size_t support_size = 1;
  double cumulative = 0.0;
  double support_sum = 0.0;
  for (std::size_t k = 1; k <= dim; ++k) {
    const double zk = z[order[k - 1]] - top;
    cumulative += zk;
    if (1.0 + static_cast<double>(k) * zk > cumulative) {
      support_size = k;
      support_sum = cumulative;
    }
  }

  SparsemaxResult result;
  const double shifted_threshold = (support_sum - 1.0) / static_cast<double>(support_size);
  result.threshold = shifted_threshold + top;
  // Outputs are computed per index, so tied entries get identical values.
  result.output.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    result.output[i] = std::max((z[i] - top) - shifted_threshold, 0.0);
    if (result.output[i] > 0.0) result.support.push_back(i);
  }
  return result;
}

std::vector<double> sparsemax_backward(const SparsemaxResult& result,
                                       std::span<const double> upstream) {
  require(upstream.size() == result.output.size(), ErrorCode::kDimension,
          "sparsemax_backward: upstream length mismatch");
  require(!result.support.empty(), ErrorCode::kInvariant, "sparsemax result has empty support");
  double mean = 0.0;
  for (std::size_t i : result.support) mean += upstream[i];
  mean /= static_cast<double>(result.support.size());
  std::vector<double> grad(upstream.size(), 0.0);
  for (std::size_t i : result.support) grad[i] = upstream[i] - mean;
  return grad;
}

CoeffActivation coeff_activation(std::span<const double> logits) {
  CoeffActivation act;
  act.exp_logits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    require(std::isfinite(logits[i]), ErrorCode::kNumeric, "coefficient logit is not finite");
    double v = logits[i];
    if (v > kExpClamp) {
      v = kExpClamp;
      act.clamped = true;
    }
    act.exp_logits[i] = std::exp(v);
  }
  act.projection = sparsemax(act.exp_logits);
  return act;
}

std::vector<double> coeff_activation_backward(const CoeffActivation& activation,
                                              std::span<const double> logits,
                                              std::span<const double> upstream) {
  auto grad = sparsemax_backward(activation.projection, upstream);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = logits[i] > kExpClamp ? 0.0 : grad[i] * activation.exp_logits[i];
  }
  return grad;
}

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used only by tests. Nothing here
// calls the library code it is meant to check.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

Dense zeros(std::size_t rows, std::size_t cols);
Dense identity(std::size_t n);
Dense multiply(const Dense& a, const Dense& b);
Dense add(const Dense& a, const Dense& b);
Dense scale(const Dense& a, double s);
Dense transpose(const Dense& a);

/// D^{-1/2}(A + I)D^{-1/2} from an undirected edge list (either orientation,
/// duplicates and self-loops tolerated), computed densely.
Dense normalized_adjacency(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Σ mu_k A^k with explicit dense powers.
Dense gpr_matrix(const Dense& a, std::span<const double> mu);

/// Euclidean projection onto the probability simplex by enumerating every
/// support S and solving the equality-constrained least squares on it.
std::vector<double> simplex_projection_bruteforce(std::span<const double> z);

/// Roots of a monic cubic x^3 + b x^2 + c x + d with three real roots,
/// trigonometric method, descending.
std::vector<double> cubic_roots(double b, double c, double d);

/// Central finite difference of f with respect to x[i].
double central_difference(const std::function<double(std::span<const double>)>& f,
                          std::vector<double> x, std::size_t i, double step);

/// Scalar Adam with classic L2 folded into the gradient.
struct ScalarAdam {
  double lr = 0.01, beta1 = 0.9, beta2 = 0.999, eps = 1e-8, decay = 0.0;
  double m = 0.0, v = 0.0;
  double step(double param, double grad, std::size_t t);
};

/// Row-wise log-softmax, elementwise relu, dense propagation helpers for the
/// tape-free model references.
Dense log_softmax_rows(const Dense& a);
Dense relu(const Dense& a);
/// h ((1 - beta) I + beta w), I rectangular.
Dense identity_mix(const Dense& h, const Dense& w, double beta);

struct ModelWeights {
  std::vector<Dense> w;                  // W0..
  std::vector<std::vector<double>> mu;   // per GPR layer (already on the simplex)
};

/// Eval-mode forwards written directly from the layer formulas.
Dense gcn_forward(const Dense& a, const Dense& x, const ModelWeights& p);
Dense gcnii_forward(const Dense& a, const Dense& x, const ModelWeights& p, double alpha,
                    double lambda);
Dense adagpr_forward(const Dense& a, const Dense& x, const ModelWeights& p, double alpha,
                     double lambda);
Dense gprgnn_forward(const Dense& a, const Dense& x, const ModelWeights& p);

/// Multinomial logistic regression by full-batch gradient descent; returns
/// the accuracy on `test` after training on `train`.
double logistic_regression_accuracy(const Dense& x, const std::vector<int>& labels,
                                    std::size_t classes, const std::vector<std::size_t>& train,
                                    const std::vector<std::size_t>& test);

}  // namespace oracle

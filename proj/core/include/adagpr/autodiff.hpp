// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "adagpr/dense.hpp"
#include "adagpr/graph.hpp"
#include "adagpr/rng.hpp"
#include "adagpr/sparsemax.hpp"

namespace adagpr::ad {

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;

  [[nodiscard]] std::size_t id() const noexcept { return id_; }
  [[nodiscard]] Tape* tape() const noexcept { return tape_; }
  [[nodiscard]] const Matrix& value() const;
  [[nodiscard]] bool requires_grad() const;
  [[nodiscard]] std::size_t rows() const { return value().rows(); }
  [[nodiscard]] std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradients of leaf parameters keyed by node id.
using GradientSet = std::map<std::size_t, Matrix>;

/// Append-only record of dense operations for reverse-mode differentiation.
///
/// Nodes are stored in creation order, which is a topological order because
/// an operation can only consume nodes that already exist. A tape is
/// single-threaded and single-use: backward() may run once.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Matrix value);

  /// Records an op output. `backward` reads grad(self) and accumulates into inputs.
  Var record(Matrix value, bool requires_grad, BackwardFn backward);

  [[nodiscard]] const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
  [[nodiscard]] bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  /// Gradient of the node; an all-zero matrix of the right shape if nothing flowed in.
  [[nodiscard]] Matrix grad(Var v) const;
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

  /// Adds `g` into the gradient buffer of node `id` (no-op if it needs no grad).
  void accumulate(std::size_t id, const Matrix& g);
  /// Same, with the increment scaled by alpha.
  void accumulate_scaled(std::size_t id, double alpha, const Matrix& g);
  [[nodiscard]] const Matrix& upstream(std::size_t id) const { return nodes_.at(id).grad; }

  /// Reverse sweep from a 1x1 root. Returns gradients of every parameter leaf
  /// that received one. Throws kContract for a non-scalar root or a second call.
  GradientSet backward(Var loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool is_leaf = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Operations. Every input Var must live on the same tape.

Var matmul(Var a, Var b);
/// a * x with a constant sparse matrix; `a` must outlive the tape.
Var spmm_const(const SparseMatrix& a, Var x);
Var add(Var a, Var b);
Var scale(Var a, double factor);
/// c1 * a + c2 * b
Var affine_combine(double c1, Var a, double c2, Var b);
/// Subgradient 0 at 0.
Var relu(Var a);
/// Inverted dropout. Identity (and no RNG draws) when !train or rate == 0.
Var dropout(Var a, double rate, bool train, Rng& rng);
Var log_softmax_rows(Var a);
/// h * ((1 - beta) I + beta w), I being the rectangular h.cols() x w.cols() identity.
Var identity_mix(Var h, Var w, double beta);
/// Mean of -log_probs[i, labels[i]] over i in mask; gradient only on masked rows.
Var nll_loss_masked(Var log_probs, std::span<const int> labels, std::span<const std::size_t> mask);
/// Sum of all entries, 1x1.
Var sum(Var a);
/// (Σ_k mu_k a^k) x with mu a 1xK node; `a` must outlive the tape.
Var gpr(const SparseMatrix& a, Var mu, Var x);
/// sparsemax(exp(v)) for a 1xK logit row.
Var coeff_activation(Var v);

}  // namespace adagpr::ad

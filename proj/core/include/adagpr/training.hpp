// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "adagpr/dense.hpp"
#include "adagpr/graph.hpp"
#include "adagpr/models.hpp"

namespace adagpr {

/// Disjoint transductive node sets; each list is sorted ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  /// Throws kSplit unless the sets are disjoint, inside [0, num_nodes), and train is non-empty.
  void validate(std::size_t num_nodes) const;
  friend bool operator==(const Split&, const Split&) = default;
};

struct StandardSplitOptions {
  std::size_t per_class = 20;
  std::size_t val_size = 500;
  std::size_t test_size = 1000;
};

struct RandomSplitOptions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

/// First `per_class` nodes of every class (id order) for training; the next
/// `val_size` remaining nodes in id order for validation; the next
/// `test_size` after those for testing.
Split make_standard_split(std::span<const int> labels, std::size_t num_classes,
                          const StandardSplitOptions& options);

/// Per-class stratified random split with the given fractions.
Split make_random_split(std::span<const int> labels, std::size_t num_classes,
                        const RandomSplitOptions& options, std::uint64_t seed);

struct TrainConfig {
  double lr = 0.01;
  double wd1 = 0.0;     // initial group (W0)
  double wd2 = 1e-4;    // hidden group (W1..WL)
  double wd3 = 0.0;     // coefficient logits (v)
  std::size_t max_epochs = 1500;
  std::size_t patience = 100;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;

  void validate() const;
  [[nodiscard]] double decay(ParamGroup group) const;
};

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// L2 coefficient per ParamGroup (initial, hidden, coeff).
  std::array<double, 3> decay{0.0, 0.0, 0.0};
};

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;

  static AdamState zeros_like(const ParameterSet& params);
};

/// One bias-corrected Adam update at step t >= 1. L2 decay is folded into the
/// gradient (g + wd·p) using each parameter's group rate.
void adam_step(ParameterSet& params, std::span<const Matrix> grads, AdamState& state,
               std::size_t t, const AdamOptions& options);

struct Metrics {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_accuracy;
  double initial_val_loss = 0.0;
  double test_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double wall_seconds = 0.0;
};

struct CoefficientSnapshot {
  std::size_t epoch = 0;
  CoefficientTable coefficients;
};

struct FitResult {
  ParameterSet best;
  Metrics metrics;
  /// μ every eval_every epochs, starting from the initialization (epoch 0).
  std::vector<CoefficientSnapshot> trace;
  /// Coefficients of the best snapshot.
  CoefficientTable final_coefficients;
};

struct FitHooks {
  /// Runs after each optimizer step; may modify parameters.
  std::function<void(std::size_t epoch, ParameterSet& params)> after_step;
};

/// Argmax accuracy over `nodes`; ties go to the lowest class index.
double accuracy(const Matrix& log_probs, std::span<const int> labels,
                std::span<const std::size_t> nodes);

/// Full-graph transductive training with early stopping on validation loss.
/// Throws TrainingDivergence when a loss becomes non-finite.
FitResult fit(const ModelSpec& spec, const TrainConfig& config, const Graph& graph,
              const Matrix& features, std::span<const int> labels, const Split& split,
              const FitHooks& hooks = {});

/// Evaluation-mode forward pass; returns N×c log-probabilities.
Matrix predict(const ModelSpec& spec, const ParameterSet& params, const SparseMatrix& adjacency,
               const Matrix& features);

}  // namespace adagpr

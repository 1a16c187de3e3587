// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adagpr/autodiff.hpp"
#include "adagpr/dense.hpp"
#include "adagpr/graph.hpp"
#include "adagpr/rng.hpp"

namespace adagpr {

enum class Variant { kGcn, kGcnii, kGprgnn, kAdagpr, kAdagprUniform };

std::string_view to_string(Variant variant);
/// Accepts the CLI names: gcn, gcnii, gprgnn, adagpr, adagpr-uniform
/// (adagpr-fixed-uniform is accepted as an alias).
Variant parse_variant(std::string_view name);

enum class ParamGroup { kInitial, kHidden, kCoeff };

std::string_view to_string(ParamGroup group);

/// Per-layer GPR coefficient rows, layer 1 first.
using CoefficientTable = std::vector<std::vector<double>>;

struct ModelSpec {
  Variant variant = Variant::kAdagpr;
  std::size_t layers = 2;    // L, graph convolution layers
  std::size_t order = 2;     // K, GPR coefficients per layer
  std::size_t hidden = 16;   // h
  std::size_t classes = 2;   // c
  std::size_t features = 1;  // q
  double alpha = 0.1;
  double lambda = 0.5;
  double dropout = 0.5;
  /// Fixed coefficients replacing the learned ones (L rows for adagpr, one row
  /// for gprgnn). adagpr-uniform fills this with 1/K automatically.
  std::optional<CoefficientTable> frozen_mu;

  /// Throws kParameter on out-of-range values.
  void validate() const;
  [[nodiscard]] bool learns_coefficients() const;
  [[nodiscard]] bool uses_initial_residual() const;
  /// β_l = ln(λ/l + 1) for l >= 1.
  [[nodiscard]] double beta(std::size_t layer) const;
  /// The frozen table in effect (explicit, or uniform for adagpr-uniform), if any.
  [[nodiscard]] std::optional<CoefficientTable> fixed_coefficients() const;
};

struct Parameter {
  std::string name;
  ParamGroup group;
  Matrix value;
};

/// Trainable tensors of one model, in a fixed order.
///
/// gcn:           W0 (q×h), W1..W{L-2} (h×h), W{L-1} (h×c)
/// gcnii/adagpr:  W0 (q×h), W1..W{L-1} (h×h), WL (h×c), v1..vL (1×K, learned adagpr only)
/// gprgnn:        W0 (q×h), W1 (h×c), v (1×K unless frozen)
struct ParameterSet {
  std::vector<Parameter> items;

  [[nodiscard]] const Parameter& get(std::string_view name) const;
  [[nodiscard]] Parameter& get(std::string_view name);
  [[nodiscard]] const Parameter* find(std::string_view name) const;
};

/// W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); coefficient logits start at 0.
ParameterSet init_parameters(const ModelSpec& spec, Rng& rng);

struct ForwardResult {
  ad::Var log_probs;
  /// One tape leaf per ParameterSet item, same order.
  std::vector<ad::Var> params;
  /// Coefficients used by each GPR layer in this pass.
  CoefficientTable coefficients;
};

/// Records the model selected by spec.variant on `tape`. `adjacency` must
/// outlive the tape. Dropout draws come from `rng` only when train is true.
ForwardResult forward(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                      const SparseMatrix& adjacency, const Matrix& features, bool train, Rng& rng);

ForwardResult build_adagpr(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                           const SparseMatrix& adjacency, const Matrix& features, bool train,
                           Rng& rng);
ForwardResult build_gcnii(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                          const SparseMatrix& adjacency, const Matrix& features, bool train,
                          Rng& rng);
ForwardResult build_gcn(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                        const SparseMatrix& adjacency, const Matrix& features, bool train,
                        Rng& rng);
ForwardResult build_gprgnn(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                           const SparseMatrix& adjacency, const Matrix& features, bool train,
                           Rng& rng);

/// Coefficients the model would use, computed without a tape. Empty for gcn;
/// e1 rows (K = max(order, 2)) for gcnii.
CoefficientTable coefficient_table(const ModelSpec& spec, const ParameterSet& params);

/// Max column L1 norm of every weight matrix W0..WL (the B^(l) of the
/// complexity analysis); gcnii/adagpr only.
std::vector<double> weight_norm_bounds(const ParameterSet& params);

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0

#include "adagpr/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "adagpr/error.hpp"
#include "adagpr/sparsemax.hpp"

namespace adagpr {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kGcn: return "gcn";
    case Variant::kGcnii: return "gcnii";
    case Variant::kGprgnn: return "gprgnn";
    case Variant::kAdagpr: return "adagpr";
    case Variant::kAdagprUniform: return "adagpr-uniform";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "gcn") return Variant::kGcn;
  if (name == "gcnii") return Variant::kGcnii;
  if (name == "gprgnn") return Variant::kGprgnn;
  if (name == "adagpr") return Variant::kAdagpr;
  if (name == "adagpr-uniform" || name == "adagpr-fixed-uniform") return Variant::kAdagprUniform;
  fail(ErrorCode::kParameter, "unknown model variant '" + std::string(name) + "'");
}

std::string_view to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::kInitial: return "initial";
    case ParamGroup::kHidden: return "hidden";
    case ParamGroup::kCoeff: return "coeff";
  }
  return "unknown";
}

void ModelSpec::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::kParameter, what); };
  check(layers >= 1, "layers must be >= 1");
  check(hidden >= 1, "hidden width must be >= 1");
  check(classes >= 1, "classes must be >= 1");
  check(features >= 1, "feature dimension must be >= 1");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  if (variant != Variant::kGcn && variant != Variant::kGprgnn) {
    check(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    check(lambda > 0.0, "lambda must be > 0");
  }
  if (variant == Variant::kAdagpr || variant == Variant::kAdagprUniform ||
      variant == Variant::kGprgnn) {
    check(order >= 1, "GPR order K must be >= 1");
  }
  if (frozen_mu) {
    check(variant == Variant::kAdagpr || variant == Variant::kGprgnn,
          "frozen coefficients apply to adagpr and gprgnn only");
    const std::size_t rows = variant == Variant::kGprgnn ? 1 : layers;
    check(frozen_mu->size() == rows,
          "frozen coefficient table needs " + std::to_string(rows) + " rows");
    for (const auto& row : *frozen_mu) {
      check(row.size() == order, "frozen coefficient row length must equal K");
      double total = 0.0;
      for (double m : row) {
        check(m >= 0.0, "frozen coefficients must be non-negative");
        total += m;
      }
      check(std::abs(total - 1.0) <= 1e-9, "frozen coefficient rows must sum to 1");
    }
  }
}

bool ModelSpec::learns_coefficients() const {
  return (variant == Variant::kAdagpr || variant == Variant::kGprgnn) && !frozen_mu;
}

bool ModelSpec::uses_initial_residual() const {
  return variant == Variant::kGcnii || variant == Variant::kAdagpr ||
         variant == Variant::kAdagprUniform;
}

double ModelSpec::beta(std::size_t layer) const {
  require(layer >= 1, ErrorCode::kParameter, "beta schedule is indexed from layer 1");
  return std::log(lambda / static_cast<double>(layer) + 1.0);
}

std::optional<CoefficientTable> ModelSpec::fixed_coefficients() const {
  if (variant == Variant::kAdagprUniform) {
    return CoefficientTable(layers, std::vector<double>(order, 1.0 / static_cast<double>(order)));
  }
  return frozen_mu;
}

const Parameter* ParameterSet::find(std::string_view name) const {
  for (const auto& p : items)
    if (p.name == name) return &p;
  return nullptr;
}

const Parameter& ParameterSet::get(std::string_view name) const {
  const Parameter* p = find(name);
  require(p != nullptr, ErrorCode::kContract, "no parameter named '" + std::string(name) + "'");
  return *p;
}

Parameter& ParameterSet::get(std::string_view name) {
  return const_cast<Parameter&>(std::as_const(*this).get(name));
}

namespace {

Matrix uniform_init(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix w(rows, cols);
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  return w;
}

std::string weight_name(std::size_t l) { return "W" + std::to_string(l); }

}  // namespace

ParameterSet init_parameters(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  ParameterSet set;
  auto add_weight = [&](std::size_t index, std::size_t rows, std::size_t cols) {
    set.items.push_back(Parameter{weight_name(index),
                                  index == 0 ? ParamGroup::kInitial : ParamGroup::kHidden,
                                  uniform_init(rows, cols, rng)});
  };
  const std::size_t q = spec.features;
  const std::size_t h = spec.hidden;
  const std::size_t c = spec.classes;
  switch (spec.variant) {
    case Variant::kGcn:
      for (std::size_t l = 0; l < spec.layers; ++l) {
        add_weight(l, l == 0 ? q : h, l + 1 == spec.layers ? c : h);
      }
      break;
    case Variant::kGcnii:
    case Variant::kAdagpr:
    case Variant::kAdagprUniform:
      add_weight(0, q, h);
      for (std::size_t l = 1; l <= spec.layers; ++l) add_weight(l, h, l == spec.layers ? c : h);
      if (spec.variant == Variant::kAdagpr && spec.learns_coefficients()) {
        for (std::size_t l = 1; l <= spec.layers; ++l) {
          set.items.push_back(
              Parameter{"v" + std::to_string(l), ParamGroup::kCoeff, Matrix(1, spec.order)});
        }
      }
      break;
    case Variant::kGprgnn:
      add_weight(0, q, h);
      add_weight(1, h, c);
      if (spec.learns_coefficients()) {
        set.items.push_back(Parameter{"v", ParamGroup::kCoeff, Matrix(1, spec.order)});
      }
      break;
  }
  return set;
}

namespace {

struct Bound {
  std::vector<ad::Var> vars;
  const ParameterSet* params;

  ad::Var operator[](std::string_view name) const {
    for (std::size_t i = 0; i < params->items.size(); ++i)
      if (params->items[i].name == name) return vars[i];
    fail(ErrorCode::kContract, "parameter '" + std::string(name) + "' missing from set");
  }
};

Bound bind(ad::Tape& tape, const ParameterSet& params) {
  Bound b{{}, &params};
  b.vars.reserve(params.items.size());
  for (const auto& p : params.items) b.vars.push_back(tape.parameter(p.value));
  return b;
}

void require_input_shapes(const ModelSpec& spec, const SparseMatrix& adjacency,
                          const Matrix& features) {
  spec.validate();
  require(adjacency.n_rows == adjacency.n_cols && adjacency.n_rows == features.rows(),
          ErrorCode::kDimension, "adjacency and feature row counts disagree");
  require(features.cols() == spec.features, ErrorCode::kDimension,
          "feature width " + std::to_string(features.cols()) + " != spec.features " +
              std::to_string(spec.features));
}

/// Shared GCNII/AdaGPR body. `use_gpr` selects the propagation operator.
ForwardResult deep_residual(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                            const SparseMatrix& adjacency, const Matrix& features, bool train,
                            Rng& rng, bool use_gpr) {
  require_input_shapes(spec, adjacency, features);
  ForwardResult result;
  Bound w = bind(tape, params);
  result.params = w.vars;

  const auto fixed = spec.fixed_coefficients();
  const ad::Var x = tape.constant(features);
  const ad::Var h0 = ad::relu(ad::matmul(ad::dropout(x, spec.dropout, train, rng), w["W0"]));
  ad::Var h = h0;
  for (std::size_t l = 1; l <= spec.layers; ++l) {
    const ad::Var in = ad::dropout(h, spec.dropout, train, rng);
    ad::Var propagated;
    if (use_gpr) {
      ad::Var mu;
      if (fixed) {
        mu = tape.constant(Matrix::row_vector((*fixed)[l - 1]));
      } else {
        mu = ad::coeff_activation(w["v" + std::to_string(l)]);
      }
      const auto row = mu.value().row(0);
      result.coefficients.emplace_back(row.begin(), row.end());
      propagated = ad::gpr(adjacency, mu, in);
    } else {
      propagated = ad::spmm_const(adjacency, in);
    }
    const ad::Var support = ad::affine_combine(1.0 - spec.alpha, propagated, spec.alpha, h0);
    h = ad::relu(ad::identity_mix(support, w[weight_name(l)], spec.beta(l)));
  }
  result.log_probs = ad::log_softmax_rows(h);
  return result;
}

}  // namespace

ForwardResult build_adagpr(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                           const SparseMatrix& adjacency, const Matrix& features, bool train,
                           Rng& rng) {
  require(spec.variant == Variant::kAdagpr || spec.variant == Variant::kAdagprUniform,
          ErrorCode::kContract, "build_adagpr needs an adagpr spec");
  return deep_residual(tape, spec, params, adjacency, features, train, rng, true);
}

ForwardResult build_gcnii(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                          const SparseMatrix& adjacency, const Matrix& features, bool train,
                          Rng& rng) {
  return deep_residual(tape, spec, params, adjacency, features, train, rng, false);
}

ForwardResult build_gcn(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                        const SparseMatrix& adjacency, const Matrix& features, bool train,
                        Rng& rng) {
  require_input_shapes(spec, adjacency, features);
  ForwardResult result;
  Bound w = bind(tape, params);
  result.params = w.vars;
  ad::Var h = tape.constant(features);
  for (std::size_t l = 0; l < spec.layers; ++l) {
    const ad::Var in = ad::dropout(h, spec.dropout, train, rng);
    h = ad::spmm_const(adjacency, ad::matmul(in, w[weight_name(l)]));
    if (l + 1 < spec.layers) h = ad::relu(h);
  }
  result.log_probs = ad::log_softmax_rows(h);
  return result;
}

ForwardResult build_gprgnn(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                           const SparseMatrix& adjacency, const Matrix& features, bool train,
                           Rng& rng) {
  require_input_shapes(spec, adjacency, features);
  ForwardResult result;
  Bound w = bind(tape, params);
  result.params = w.vars;
  const ad::Var x = tape.constant(features);
  const ad::Var hidden = ad::relu(ad::matmul(ad::dropout(x, spec.dropout, train, rng), w["W0"]));
  const ad::Var local = ad::matmul(ad::dropout(hidden, spec.dropout, train, rng), w["W1"]);
  const ad::Var mu = spec.frozen_mu ? tape.constant(Matrix::row_vector(spec.frozen_mu->front()))
                                    : ad::coeff_activation(w["v"]);
  const auto row = mu.value().row(0);
  result.coefficients.emplace_back(row.begin(), row.end());
  result.log_probs = ad::log_softmax_rows(ad::gpr(adjacency, mu, local));
  return result;
}

ForwardResult forward(ad::Tape& tape, const ModelSpec& spec, const ParameterSet& params,
                      const SparseMatrix& adjacency, const Matrix& features, bool train,
                      Rng& rng) {
  switch (spec.variant) {
    case Variant::kGcn: return build_gcn(tape, spec, params, adjacency, features, train, rng);
    case Variant::kGcnii: return build_gcnii(tape, spec, params, adjacency, features, train, rng);
    case Variant::kGprgnn: return build_gprgnn(tape, spec, params, adjacency, features, train, rng);
    case Variant::kAdagpr:
    case Variant::kAdagprUniform:
      return build_adagpr(tape, spec, params, adjacency, features, train, rng);
  }
  fail(ErrorCode::kContract, "unhandled variant");
}

CoefficientTable coefficient_table(const ModelSpec& spec, const ParameterSet& params) {
  switch (spec.variant) {
    case Variant::kGcn:
      return {};
    case Variant::kGcnii: {
      std::vector<double> e1(std::max<std::size_t>(spec.order, 2), 0.0);
      e1[1] = 1.0;
      return CoefficientTable(spec.layers, e1);
    }
    case Variant::kGprgnn:
      if (spec.frozen_mu) return *spec.frozen_mu;
      return {coeff_activation(params.get("v").value.row(0)).projection.output};
    case Variant::kAdagpr:
    case Variant::kAdagprUniform: {
      if (auto fixed = spec.fixed_coefficients()) return *fixed;
      CoefficientTable table;
      for (std::size_t l = 1; l <= spec.layers; ++l) {
        table.push_back(
            coeff_activation(params.get("v" + std::to_string(l)).value.row(0)).projection.output);
      }
      return table;
    }
  }
  return {};
}

std::vector<double> weight_norm_bounds(const ParameterSet& params) {
  std::vector<double> bounds;
  for (std::size_t l = 0;; ++l) {
    const Parameter* p = params.find(weight_name(l));
    if (p == nullptr) break;
    double worst = 0.0;
    for (std::size_t c = 0; c < p->value.cols(); ++c) {
      double col = 0.0;
      for (std::size_t r = 0; r < p->value.rows(); ++r) col += std::abs(p->value(r, c));
      worst = std::max(worst, col);
    }
    bounds.push_back(worst);
  }
  return bounds;
}

}  // namespace adagpr

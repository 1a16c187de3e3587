// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "adagpr/bounds.hpp"
#include "adagpr/config.hpp"
#include "adagpr/models.hpp"
#include "adagpr/spectrum.hpp"
#include "adagpr/training.hpp"

namespace adagpr::cli {

/// {test_accuracy, best_epoch, epochs_run, train_loss[], val_loss[],
/// val_accuracy[], wall_seconds}. wall_seconds is null unless `timing`.
std::string metrics_json(const Metrics& metrics, bool timing);

/// `stage,epoch,layer,mu_0..mu_{K-1}`; trace rows then the final (best
/// snapshot) rows. gcn runs produce the header only.
std::string coefficients_csv(const FitResult& result);

/// `index,eigenvalue` in descending eigenvalue order.
std::string spectrum_csv(const Spectrum& spectrum);
/// `k,sum_abs_lambda_pow_k`.
std::string profile_csv(std::span<const double> profile);

std::string params_json(const ParameterSet& params);
/// Rebuilds the parameter set of `spec` from params_json output.
ParameterSet parse_params_json(std::string_view text, const ModelSpec& spec);

struct BoundContext {
  BoundInput input;
  BoundReport report;
  bool corollary = false;
  double train_error = -1.0;  // negative when unknown
  double test_error = -1.0;
};

std::string bound_json(const BoundContext& context);
/// Table over l: s^(l) and the depth-l terms of both summations.
std::string bound_table(const BoundContext& context);

/// True for the models the complexity index covers (gcnii and adagpr family).
bool bound_applicable(Variant variant);

/// Builds and evaluates the bound of a trained model.
BoundContext bound_for_model(const ModelSpec& spec, const ParameterSet& params,
                             const Dataset& dataset, const Split& split,
                             const Spectrum& spectrum, const ExperimentConfig& config);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace adagpr::cli

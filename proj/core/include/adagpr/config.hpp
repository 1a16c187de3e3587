// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "adagpr/dataset.hpp"
#include "adagpr/models.hpp"
#include "adagpr/spectrum.hpp"
#include "adagpr/training.hpp"

namespace adagpr {

enum class SplitMode {
  kAuto,      // split.json when present, else random fractions
  kStored,
  kStandard,
  kRandom,
};

std::string_view to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view name);

/// Everything one training run needs. Serialized as a flat JSON object whose
/// keys mirror the train flags; unknown keys are rejected.
struct ExperimentConfig {
  std::string dataset;
  std::string out;

  Variant model = Variant::kAdagpr;
  std::size_t layers = 2;
  std::size_t k = 2;
  std::size_t hidden = 64;
  double alpha = 0.1;
  double lambda = 0.5;
  double dropout = 0.5;
  std::optional<CoefficientTable> frozen_mu;

  TrainConfig train;

  SplitMode split = SplitMode::kAuto;
  StandardSplitOptions standard;
  RandomSplitOptions random;

  bool row_normalize = false;
  /// Record wall-clock time in metrics.json (off keeps reruns byte-identical).
  bool timing = false;

  SpectrumMode spectrum = SpectrumMode::kAuto;
  double bound_r = 1.0;
  double bound_delta = 0.05;
  std::size_t kmax = 10;

  void validate() const;
};

/// Keys accepted in a config document.
std::span<const std::string_view> config_keys();

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Pretty-printed document with every key present.
std::string to_json(const ExperimentConfig& config);

/// Applies row normalization if requested.
Dataset prepare_dataset(const ExperimentConfig& config, Dataset dataset);
ModelSpec model_spec(const ExperimentConfig& config, const Dataset& dataset);
Split resolve_split(const ExperimentConfig& config, const Dataset& dataset);

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0

#include "adagpr/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adagpr/error.hpp"
#include "adagpr/rng.hpp"

namespace adagpr {

using json = nlohmann::json;

std::string_view to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::kAuto: return "auto";
    case SplitMode::kStored: return "stored";
    case SplitMode::kStandard: return "standard";
    case SplitMode::kRandom: return "random";
  }
  return "auto";
}

SplitMode parse_split_mode(std::string_view name) {
  for (SplitMode m : {SplitMode::kAuto, SplitMode::kStored, SplitMode::kStandard, SplitMode::kRandom}) {
    if (to_string(m) == name) return m;
  }
  fail(ErrorCode::kConfig, "unknown split mode '" + std::string(name) + "'");
}

namespace {

constexpr std::array<std::string_view, 31> kKeys = {
    "alpha",         "bound_delta",     "bound_r",          "dataset",   "dropout",
    "epochs",        "eval_every",      "frozen_mu",        "hidden",    "k",
    "kmax",          "lambda",          "layers",           "lr",        "model",
    "out",           "patience",        "row_normalize",    "seed",      "spectrum",
    "split",         "split_per_class", "split_test",       "split_test_frac",
    "split_train_frac", "split_val",    "split_val_frac",   "timing",    "wd1",
    "wd2",           "wd3"};

std::string_view spectrum_name(SpectrumMode mode) {
  switch (mode) {
    case SpectrumMode::kDense: return "dense";
    case SpectrumMode::kAuto: return "auto";
    case SpectrumMode::kLanczos: return "lanczos";
  }
  return "auto";
}

SpectrumMode parse_spectrum_mode(std::string_view name) {
  for (SpectrumMode m : {SpectrumMode::kDense, SpectrumMode::kAuto, SpectrumMode::kLanczos}) {
    if (spectrum_name(m) == name) return m;
  }
  fail(ErrorCode::kConfig, "unknown spectrum mode '" + std::string(name) + "'");
}

[[noreturn]] void bad_type(const std::string& key, const char* expected) {
  fail(ErrorCode::kConfig, "config key '" + key + "' must be " + expected);
}

double get_real(const json& v, const std::string& key) {
  if (!v.is_number()) bad_type(key, "a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) bad_type(key, "a non-negative integer");
  return v.get<std::size_t>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad_type(key, "a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad_type(key, "a boolean");
  return v.get<bool>();
}

CoefficientTable get_table(const json& v, const std::string& key) {
  if (!v.is_array()) bad_type(key, "an array of coefficient rows");
  CoefficientTable table;
  for (const json& row : v) {
    if (!row.is_array()) bad_type(key, "an array of coefficient rows");
    std::vector<double> values;
    for (const json& x : row) values.push_back(get_real(x, key));
    table.push_back(std::move(values));
  }
  return table;
}

}  // namespace

std::span<const std::string_view> config_keys() {
  return kKeys;
}

void ExperimentConfig::validate() const {
  require(layers >= 1, ErrorCode::kConfig, "layers must be >= 1");
  require(k >= 1, ErrorCode::kConfig, "k must be >= 1");
  require(hidden >= 1, ErrorCode::kConfig, "hidden must be >= 1");
  require(bound_r >= 0.0, ErrorCode::kConfig, "bound_r must be >= 0");
  require(bound_delta > 0.0 && bound_delta < 1.0, ErrorCode::kConfig,
          "bound_delta must lie in (0, 1)");
  require(standard.per_class >= 1, ErrorCode::kConfig, "split_per_class must be >= 1");
  for (double f : {random.train, random.val, random.test}) {
    require(f >= 0.0 && f <= 1.0, ErrorCode::kConfig, "split fractions must lie in [0, 1]");
  }
  require(random.train + random.val + random.test <= 1.0 + 1e-12, ErrorCode::kConfig,
          "split fractions must sum to at most 1");
  train.validate();
}

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  require(doc.is_object(), ErrorCode::kConfig, "config must be a JSON object");

  ExperimentConfig c;
  const auto keys = config_keys();
  for (const auto& [key, value] : doc.items()) {
    require(std::find(keys.begin(), keys.end(), key) != keys.end(), ErrorCode::kConfig,
            "unknown config key '" + key + "'");
    if (key == "dataset") c.dataset = get_string(value, key);
    else if (key == "out") c.out = get_string(value, key);
    else if (key == "model") {
      try {
        c.model = parse_variant(get_string(value, key));
      } catch (const Error& e) {
        fail(ErrorCode::kConfig, e.what());
      }
    }
    else if (key == "layers") c.layers = get_count(value, key);
    else if (key == "k") c.k = get_count(value, key);
    else if (key == "hidden") c.hidden = get_count(value, key);
    else if (key == "alpha") c.alpha = get_real(value, key);
    else if (key == "lambda") c.lambda = get_real(value, key);
    else if (key == "dropout") c.dropout = get_real(value, key);
    else if (key == "frozen_mu") {
      if (!value.is_null()) c.frozen_mu = get_table(value, key);
    }
    else if (key == "lr") c.train.lr = get_real(value, key);
    else if (key == "wd1") c.train.wd1 = get_real(value, key);
    else if (key == "wd2") c.train.wd2 = get_real(value, key);
    else if (key == "wd3") c.train.wd3 = get_real(value, key);
    else if (key == "epochs") c.train.max_epochs = get_count(value, key);
    else if (key == "patience") c.train.patience = get_count(value, key);
    else if (key == "seed") {
      if (!value.is_number_unsigned()) bad_type(key, "a non-negative integer");
      c.train.seed = value.get<std::uint64_t>();
    }
    else if (key == "eval_every") c.train.eval_every = get_count(value, key);
    else if (key == "split") c.split = parse_split_mode(get_string(value, key));
    else if (key == "split_per_class") c.standard.per_class = get_count(value, key);
    else if (key == "split_val") c.standard.val_size = get_count(value, key);
    else if (key == "split_test") c.standard.test_size = get_count(value, key);
    else if (key == "split_train_frac") c.random.train = get_real(value, key);
    else if (key == "split_val_frac") c.random.val = get_real(value, key);
    else if (key == "split_test_frac") c.random.test = get_real(value, key);
    else if (key == "row_normalize") c.row_normalize = get_bool(value, key);
    else if (key == "timing") c.timing = get_bool(value, key);
    else if (key == "spectrum") c.spectrum = parse_spectrum_mode(get_string(value, key));
    else if (key == "bound_r") c.bound_r = get_real(value, key);
    else if (key == "bound_delta") c.bound_delta = get_real(value, key);
    else if (key == "kmax") c.kmax = get_count(value, key);
  }
  try {
    c.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    fail(ErrorCode::kConfig, e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_json(const ExperimentConfig& c) {
  json doc = {
      {"dataset", c.dataset},
      {"out", c.out},
      {"model", std::string(to_string(c.model))},
      {"layers", c.layers},
      {"k", c.k},
      {"hidden", c.hidden},
      {"alpha", c.alpha},
      {"lambda", c.lambda},
      {"dropout", c.dropout},
      {"frozen_mu", c.frozen_mu ? json(*c.frozen_mu) : json(nullptr)},
      {"lr", c.train.lr},
      {"wd1", c.train.wd1},
      {"wd2", c.train.wd2},
      {"wd3", c.train.wd3},
      {"epochs", c.train.max_epochs},
      {"patience", c.train.patience},
      {"seed", c.train.seed},
      {"eval_every", c.train.eval_every},
      {"split", std::string(to_string(c.split))},
      {"split_per_class", c.standard.per_class},
      {"split_val", c.standard.val_size},
      {"split_test", c.standard.test_size},
      {"split_train_frac", c.random.train},
      {"split_val_frac", c.random.val},
      {"split_test_frac", c.random.test},
      {"row_normalize", c.row_normalize},
      {"timing", c.timing},
      {"spectrum", std::string(spectrum_name(c.spectrum))},
      {"bound_r", c.bound_r},
      {"bound_delta", c.bound_delta},
      {"kmax", c.kmax},
  };
  return doc.dump(2) + '\n';
}

Dataset prepare_dataset(const ExperimentConfig& config, Dataset dataset) {
  if (config.row_normalize) row_normalize(dataset.features);
  return dataset;
}

ModelSpec model_spec(const ExperimentConfig& config, const Dataset& dataset) {
  ModelSpec spec;
  spec.variant = config.model;
  spec.layers = config.layers;
  spec.order = config.k;
  spec.hidden = config.hidden;
  spec.classes = dataset.num_classes;
  spec.features = dataset.features.cols();
  spec.alpha = config.alpha;
  spec.lambda = config.lambda;
  spec.dropout = config.dropout;
  spec.frozen_mu = config.frozen_mu;
  spec.validate();
  return spec;
}

Split resolve_split(const ExperimentConfig& config, const Dataset& dataset) {
  switch (config.split) {
    case SplitMode::kStored:
      require(dataset.split.has_value(), ErrorCode::kSplit,
              "split mode 'stored' but the dataset has no split.json");
      return *dataset.split;
    case SplitMode::kAuto:
      if (dataset.split) return *dataset.split;
      [[fallthrough]];
    case SplitMode::kRandom:
      return make_random_split(dataset.labels, dataset.num_classes, config.random,
                               derive_seed(config.train.seed, 2));
    case SplitMode::kStandard:
      return make_standard_split(dataset.labels, dataset.num_classes, config.standard);
  }
  fail(ErrorCode::kConfig, "unreachable split mode");
}

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0

#include "adagpr/cli/artifacts.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adagpr/error.hpp"
#include "adagpr/format.hpp"

namespace adagpr::cli {

using json = nlohmann::ordered_json;

std::string metrics_json(const Metrics& m, bool timing) {
  json doc;
  doc["test_accuracy"] = m.test_accuracy;
  doc["best_epoch"] = m.best_epoch;
  doc["epochs_run"] = m.epochs_run;
  doc["initial_val_loss"] = m.initial_val_loss;
  doc["train_loss"] = m.train_loss;
  doc["val_loss"] = m.val_loss;
  doc["val_accuracy"] = m.val_accuracy;
  doc["wall_seconds"] = timing ? json(m.wall_seconds) : json(nullptr);
  return doc.dump(2) + '\n';
}

namespace {

std::size_t table_width(const FitResult& result) {
  for (const auto& snap : result.trace) {
    for (const auto& row : snap.coefficients) return row.size();
  }
  for (const auto& row : result.final_coefficients) return row.size();
  return 0;
}

void append_rows(std::string& out, std::string_view stage, std::size_t epoch,
                 const CoefficientTable& table) {
  for (std::size_t l = 0; l < table.size(); ++l) {
    out += stage;
    out += ',' + std::to_string(epoch) + ',' + std::to_string(l + 1) + ',';
    out += join_g17(table[l]);
    out += '\n';
  }
}

}  // namespace

std::string coefficients_csv(const FitResult& result) {
  const std::size_t k = table_width(result);
  std::string out = "stage,epoch,layer";
  for (std::size_t i = 0; i < k; ++i) out += ",mu_" + std::to_string(i);
  out += '\n';
  if (k == 0) return out;
  for (const auto& snap : result.trace) append_rows(out, "trace", snap.epoch, snap.coefficients);
  append_rows(out, "final", result.metrics.best_epoch, result.final_coefficients);
  return out;
}

std::string spectrum_csv(const Spectrum& spectrum) {
  std::string out = "index,eigenvalue\n";
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
    out += std::to_string(i) + ',' + format_g17(spectrum.eigenvalues[i]) + '\n';
  }
  return out;
}

std::string profile_csv(std::span<const double> profile) {
  std::string out = "k,sum_abs_lambda_pow_k\n";
  for (std::size_t k = 0; k < profile.size(); ++k) {
    out += std::to_string(k) + ',' + format_g17(profile[k]) + '\n';
  }
  return out;
}

std::string params_json(const ParameterSet& params) {
  json items = json::array();
  for (const auto& p : params.items) {
    json item;
    item["name"] = p.name;
    item["group"] = std::string(to_string(p.group));
    item["rows"] = p.value.rows();
    item["cols"] = p.value.cols();
    item["values"] = p.value.values();
    items.push_back(std::move(item));
  }
  json doc;
  doc["parameters"] = std::move(items);
  return doc.dump() + '\n';
}

ParameterSet parse_params_json(std::string_view text, const ModelSpec& spec) {
  Rng rng(0);
  ParameterSet params = init_parameters(spec, rng);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kIo, std::string("params.json: ") + e.what());
  }
  require(doc.contains("parameters") && doc["parameters"].is_array(), ErrorCode::kIo,
          "params.json: missing 'parameters' array");
  std::size_t seen = 0;
  for (const auto& item : doc["parameters"]) {
    const std::string name = item.at("name").get<std::string>();
    Parameter* p = nullptr;
    for (auto& q : params.items) {
      if (q.name == name) p = &q;
    }
    require(p != nullptr, ErrorCode::kIo, "params.json: unexpected parameter " + name);
    const auto rows = item.at("rows").get<std::size_t>();
    const auto cols = item.at("cols").get<std::size_t>();
    require(rows == p->value.rows() && cols == p->value.cols(), ErrorCode::kIo,
            "params.json: shape mismatch for " + name);
    auto values = item.at("values").get<std::vector<double>>();
    require(values.size() == rows * cols, ErrorCode::kIo, "params.json: bad length for " + name);
    p->value = Matrix(rows, cols, std::move(values));
    ++seen;
  }
  require(seen == params.items.size(), ErrorCode::kIo, "params.json: missing parameters");
  return params;
}

bool bound_applicable(Variant variant) {
  return variant == Variant::kGcnii || variant == Variant::kAdagpr ||
         variant == Variant::kAdagprUniform;
}

BoundContext bound_for_model(const ModelSpec& spec, const ParameterSet& params,
                             const Dataset& dataset, const Split& split,
                             const Spectrum& spectrum, const ExperimentConfig& config) {
  require(bound_applicable(spec.variant), ErrorCode::kInput,
          "the complexity index covers gcnii and adagpr models only");
  BoundContext ctx;
  BoundInput& in = ctx.input;
  in.spectrum = spectrum;
  in.coefficients = coefficient_table(spec, params);
  in.layers = spec.layers;
  in.alpha = spec.alpha;
  in.weight_bounds = weight_norm_bounds(params);
  in.output_bound = config.bound_r;
  in.train_size = split.train.size();
  in.test_size = split.test.size();
  in.feature_norm = frobenius_norm(dataset.features);
  in.delta = config.bound_delta;
  ctx.corollary = spec.variant == Variant::kGcnii;
  ctx.report = ctx.corollary ? evaluate_corollary1(in) : evaluate_theorem1(in);

  const SparseMatrix adjacency = normalize_adjacency(dataset.graph);
  const Matrix log_probs = predict(spec, params, adjacency, dataset.features);
  ctx.train_error = 1.0 - accuracy(log_probs, dataset.labels, split.train);
  ctx.test_error = 1.0 - accuracy(log_probs, dataset.labels, split.test);
  return ctx;
}

std::string bound_json(const BoundContext& ctx) {
  const BoundInput& in = ctx.input;
  const BoundReport& r = ctx.report;
  json doc;
  doc["applicable"] = true;
  doc["mode"] = ctx.corollary ? "gcnii" : "adagpr";
  doc["complexity_index"] = r.complexity_index;
  doc["gcnii_index"] = r.gcnii_index;
  doc["first_sum"] = r.first_sum;
  doc["second_sum"] = r.second_sum;
  doc["first_terms"] = r.first_terms;
  doc["second_terms"] = r.second_terms;
  doc["spectral_sums"] = r.spectral_sums;
  doc["q"] = r.q;
  doc["p0_factor"] = r.p0_factor;
  doc["d"] = r.d;
  doc["tail_sampling"] = r.tail_sampling;
  doc["tail_confidence"] = r.tail_confidence;
  doc["s"] = r.s;
  doc["train_error"] = ctx.train_error >= 0.0 ? json(ctx.train_error) : json(nullptr);
  doc["test_error"] = ctx.test_error >= 0.0 ? json(ctx.test_error) : json(nullptr);
  json inputs;
  inputs["layers"] = in.layers;
  inputs["alpha"] = in.alpha;
  inputs["weight_bounds"] = in.weight_bounds;
  inputs["coefficients"] = in.coefficients;
  inputs["output_bound"] = in.output_bound;
  inputs["train_size"] = in.train_size;
  inputs["test_size"] = in.test_size;
  inputs["feature_norm"] = in.feature_norm;
  inputs["delta"] = in.delta;
  inputs["num_nodes"] = in.spectrum.dimension;
  inputs["spectrum_method"] = std::string(to_string(in.spectrum.method));
  inputs["eigenvalues_computed"] = in.spectrum.truncation_count;
  doc["inputs"] = std::move(inputs);
  return doc.dump(2) + '\n';
}

std::string bound_table(const BoundContext& ctx) {
  const BoundReport& r = ctx.report;
  std::string out = "l,spectral_sum,first_term,second_term\n";
  out += "0," + format_g17(r.spectral_sums.at(0)) + ",,\n";
  for (std::size_t l = 1; l < r.spectral_sums.size(); ++l) {
    out += std::to_string(l) + ',' + format_g17(r.spectral_sums[l]) + ',' +
           format_g17(r.first_terms[l - 1]) + ',' + format_g17(r.second_terms[l - 1]) + '\n';
  }
  out += "complexity_index," + format_g17(r.complexity_index) + ",,\n";
  out += "gcnii_index," + format_g17(r.gcnii_index) + ",,\n";
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace adagpr::cli

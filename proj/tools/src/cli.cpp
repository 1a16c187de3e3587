// SPDX-License-Identifier: Apache-2.0

#include "adagpr/cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "adagpr/bounds.hpp"
#include "adagpr/cli/artifacts.hpp"
#include "adagpr/config.hpp"
#include "adagpr/dataset.hpp"
#include "adagpr/error.hpp"
#include "adagpr/format.hpp"
#include "adagpr/spectrum.hpp"
#include "adagpr/training.hpp"

namespace adagpr::cli {

namespace fs = std::filesystem;

namespace {

struct TrainFlags {
  std::optional<std::string> config;
  std::optional<std::string> dataset;
  std::optional<std::string> model;
  std::optional<std::size_t> layers;
  std::optional<std::size_t> k;
  std::optional<std::size_t> hidden;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> dropout;
  std::optional<double> lr;
  std::optional<double> wd1;
  std::optional<double> wd2;
  std::optional<double> wd3;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> patience;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> eval_every;
  std::optional<std::string> split;
  std::optional<std::string> out;
  bool row_normalize = false;
  bool timing = false;
  bool force = false;
};

struct CoeffsFlags {
  std::string run;
  std::optional<std::size_t> layer;
  bool evolution = false;
};

struct SpectrumFlags {
  std::string dataset;
  std::size_t kmax = 10;
  std::string mode = "auto";
  std::optional<std::string> out;
  bool force = false;
};

struct BoundFlags {
  std::optional<std::string> run;
  std::optional<std::string> dataset;
  std::optional<std::string> mu_file;
  std::optional<double> alpha;
  std::optional<double> r;
  std::optional<double> delta;
  std::optional<std::string> weights;
  std::optional<std::size_t> layers;
  std::optional<std::size_t> train_size;
  std::optional<std::size_t> test_size;
  std::string mode = "auto";
  bool gcnii = false;
  bool row_normalize = false;
  bool allow_truncated = false;
  std::optional<std::string> out;
  bool force = false;
};

struct GenerateFlags {
  std::string out;
  bool force = false;
  SbmOptions sbm;
  HeterophilousOptions hetero;
};

struct EvaluateFlags {
  std::string run;
};

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    require(fs::is_directory(dir), ErrorCode::kIo, dir.string() + " exists and is not a directory");
    require(force || fs::is_empty(dir), ErrorCode::kIo,
            "output directory " + dir.string() + " is not empty (use --force)");
  }
  fs::create_directories(dir);
}

void prepare_out_file(const fs::path& path, bool force) {
  require(force || !fs::exists(path), ErrorCode::kIo,
          path.string() + " exists (use --force)");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

SpectrumMode spectrum_mode(std::string_view name) {
  if (name == "dense") return SpectrumMode::kDense;
  if (name == "auto") return SpectrumMode::kAuto;
  if (name == "lanczos") return SpectrumMode::kLanczos;
  fail(ErrorCode::kConfig, "unknown spectrum mode '" + std::string(name) + "'");
}

std::string absolute_path(const std::string& p) {
  return fs::weakly_canonical(fs::absolute(p)).string();
}

ExperimentConfig resolve_train_config(const TrainFlags& f) {
  ExperimentConfig c = f.config ? load_config(*f.config) : ExperimentConfig{};
  if (f.dataset) c.dataset = *f.dataset;
  if (f.out) c.out = *f.out;
  if (f.model) {
    try {
      c.model = parse_variant(*f.model);
    } catch (const Error& e) {
      fail(ErrorCode::kConfig, e.what());
    }
  }
  if (f.layers) c.layers = *f.layers;
  if (f.k) c.k = *f.k;
  if (f.hidden) c.hidden = *f.hidden;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.dropout) c.dropout = *f.dropout;
  if (f.lr) c.train.lr = *f.lr;
  if (f.wd1) c.train.wd1 = *f.wd1;
  if (f.wd2) c.train.wd2 = *f.wd2;
  if (f.wd3) c.train.wd3 = *f.wd3;
  if (f.epochs) c.train.max_epochs = *f.epochs;
  if (f.patience) c.train.patience = *f.patience;
  if (f.seed) c.train.seed = *f.seed;
  if (f.eval_every) c.train.eval_every = *f.eval_every;
  if (f.split) c.split = parse_split_mode(*f.split);
  if (f.row_normalize) c.row_normalize = true;
  if (f.timing) c.timing = true;
  require(!c.dataset.empty(), ErrorCode::kConfig, "no dataset given (--dataset or config)");
  require(!c.out.empty(), ErrorCode::kConfig, "no output directory given (--out or config)");
  c.dataset = absolute_path(c.dataset);
  c.out = absolute_path(c.out);
  c.validate();
  return c;
}

int cmd_train(const TrainFlags& flags, std::ostream& out) {
  const ExperimentConfig config = resolve_train_config(flags);
  const Dataset dataset = prepare_dataset(config, load_dataset(config.dataset));
  const ModelSpec spec = model_spec(config, dataset);
  const Split split = resolve_split(config, dataset);
  prepare_out_dir(config.out, flags.force);
  const fs::path dir = config.out;
  write_file(dir / "config.resolved.json", to_json(config));

  const FitResult result =
      fit(spec, config.train, dataset.graph, dataset.features, dataset.labels, split);

  write_file(dir / "metrics.json", metrics_json(result.metrics, config.timing));
  write_file(dir / "coefficients.csv", coefficients_csv(result));
  write_file(dir / "params.json", params_json(result.best));

  const Spectrum spectrum = compute_spectrum(normalize_adjacency(dataset.graph), config.spectrum);
  write_file(dir / "spectrum.csv", spectrum_csv(spectrum));
  if (bound_applicable(spec.variant) && !split.test.empty()) {
    write_file(dir / "bound.json",
               bound_json(bound_for_model(spec, result.best, dataset, split, spectrum, config)));
  } else {
    nlohmann::ordered_json doc;
    doc["applicable"] = false;
    doc["reason"] = bound_applicable(spec.variant)
                        ? "empty test set"
                        : "the complexity index covers gcnii and adagpr models only";
    write_file(dir / "bound.json", doc.dump(2) + '\n');
  }

  out << "test_accuracy " << format_shortest(result.metrics.test_accuracy) << " best_epoch "
      << result.metrics.best_epoch << " epochs_run " << result.metrics.epochs_run << '\n';
  return kExitOk;
}

struct CoeffRow {
  std::string stage;
  std::size_t epoch = 0;
  std::size_t layer = 0;
  std::vector<std::string> values;
};

int cmd_coeffs(const CoeffsFlags& flags, std::ostream& out) {
  const fs::path path = fs::path(flags.run) / "coefficients.csv";
  require(fs::exists(path), ErrorCode::kIo, "no coefficient trace at " + path.string());
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  const std::string header = line;
  std::vector<CoeffRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    require(fields.size() >= 4, ErrorCode::kIo, "malformed row in " + path.string());
    CoeffRow row;
    row.stage = fields[0];
    row.epoch = static_cast<std::size_t>(parse_integer(fields[1], "epoch"));
    row.layer = static_cast<std::size_t>(parse_integer(fields[2], "layer"));
    row.values.assign(fields.begin() + 3, fields.end());
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::kInput,
          "run has no GPR coefficient trace (" + path.string() + ")");
  const std::string mu_header = header.substr(std::string("stage,epoch,layer").size());

  auto layer_ok = [&](std::size_t l) { return !flags.layer || *flags.layer == l; };
  bool any = false;
  if (flags.evolution) {
    out << "epoch,layer" << mu_header << '\n';
    for (const auto& r : rows) {
      if (r.stage != "trace" || !layer_ok(r.layer)) continue;
      out << r.epoch << ',' << r.layer;
      for (const auto& v : r.values) out << ',' << v;
      out << '\n';
      any = true;
    }
  } else {
    out << "layer" << mu_header << '\n';
    for (const auto& r : rows) {
      if (r.stage != "final" || !layer_ok(r.layer)) continue;
      out << r.layer;
      for (const auto& v : r.values) out << ',' << v;
      out << '\n';
      any = true;
    }
  }
  require(any, ErrorCode::kInput, "no coefficient rows for the requested layer");
  return kExitOk;
}

int cmd_spectrum(const SpectrumFlags& flags, std::ostream& out, std::ostream& err) {
  const Dataset dataset = load_dataset(flags.dataset);
  const Spectrum spectrum =
      compute_spectrum(normalize_adjacency(dataset.graph), spectrum_mode(flags.mode));
  std::string profile;
  if (spectrum.truncated()) {
    err << "warning: spectrum truncated to " << spectrum.truncation_count << " of "
        << spectrum.dimension << " eigenvalues; oversmoothing profile skipped\n";
  } else {
    profile = profile_csv(oversmoothing_profile(spectrum, flags.kmax));
  }
  if (flags.out) {
    prepare_out_dir(*flags.out, flags.force);
    write_file(fs::path(*flags.out) / "spectrum.csv", spectrum_csv(spectrum));
    if (!profile.empty()) write_file(fs::path(*flags.out) / "profile.csv", profile);
  }
  out << "# method " << to_string(spectrum.method) << " eigenvalues "
      << spectrum.truncation_count << " of " << spectrum.dimension << '\n';
  out << profile;
  return kExitOk;
}

CoefficientTable read_mu_file(const fs::path& path) {
  std::istringstream in(read_file(path));
  CoefficientTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) row.push_back(parse_double(f, "mu"));
    table.push_back(std::move(row));
  }
  require(!table.empty(), ErrorCode::kInput, "mu file " + path.string() + " has no rows");
  return table;
}

std::vector<double> parse_list(const std::string& text, std::string_view what) {
  std::vector<double> values;
  std::istringstream ls(text);
  std::string f;
  while (std::getline(ls, f, ',')) values.push_back(parse_double(f, what));
  return values;
}

int cmd_bound(const BoundFlags& flags, std::ostream& out) {
  require(flags.run.has_value() != flags.dataset.has_value(), ErrorCode::kConfig,
          "bound needs exactly one of --run or --dataset");
  BoundContext ctx;
  if (flags.run) {
    const fs::path run = *flags.run;
    ExperimentConfig config = load_config(run / "config.resolved.json");
    if (flags.alpha) fail(ErrorCode::kConfig, "--alpha comes from the run in --run mode");
    if (flags.r) config.bound_r = *flags.r;
    if (flags.delta) config.bound_delta = *flags.delta;
    const Dataset dataset = prepare_dataset(config, load_dataset(config.dataset));
    const ModelSpec spec = model_spec(config, dataset);
    require(bound_applicable(spec.variant), ErrorCode::kInput,
            "the complexity index covers gcnii and adagpr models only");
    const ParameterSet params = parse_params_json(read_file(run / "params.json"), spec);
    const Split split = resolve_split(config, dataset);
    const Spectrum spectrum =
        compute_spectrum(normalize_adjacency(dataset.graph), spectrum_mode(flags.mode));
    require(!spectrum.truncated() || flags.allow_truncated, ErrorCode::kInput,
            "spectrum is truncated; pass --allow-truncated to accept it");
    ctx = bound_for_model(spec, params, dataset, split, spectrum, config);
    if (flags.weights) {
      ctx.input.weight_bounds = parse_list(*flags.weights, "weight bound");
      ctx.report = ctx.corollary ? evaluate_corollary1(ctx.input) : evaluate_theorem1(ctx.input);
    }
  } else {
    require(flags.mu_file.has_value() || flags.gcnii, ErrorCode::kConfig,
            "--dataset mode needs --mu-file (or --gcnii)");
    Dataset dataset = load_dataset(*flags.dataset);
    if (flags.row_normalize) row_normalize(dataset.features);
    BoundInput& in = ctx.input;
    in.spectrum = compute_spectrum(normalize_adjacency(dataset.graph), spectrum_mode(flags.mode));
    require(!in.spectrum.truncated() || flags.allow_truncated, ErrorCode::kInput,
            "spectrum is truncated; pass --allow-truncated to accept it");
    in.coefficients = flags.mu_file ? read_mu_file(*flags.mu_file)
                                    : CoefficientTable(flags.layers.value_or(1), {0.0, 1.0});
    in.layers = flags.layers.value_or(in.coefficients.size());
    require(in.layers <= in.coefficients.size(), ErrorCode::kInput,
            "L = " + std::to_string(in.layers) + " exceeds the " +
                std::to_string(in.coefficients.size()) + " coefficient rows available");
    in.coefficients.resize(in.layers);
    in.alpha = flags.alpha.value_or(0.1);
    in.output_bound = flags.r.value_or(1.0);
    in.delta = flags.delta.value_or(0.05);
    in.weight_bounds = flags.weights ? parse_list(*flags.weights, "weight bound")
                                     : std::vector<double>(in.layers + 1, 1.0);
    if (flags.train_size && flags.test_size) {
      in.train_size = *flags.train_size;
      in.test_size = *flags.test_size;
    } else {
      require(dataset.split.has_value(), ErrorCode::kConfig,
              "dataset has no split.json; pass --train-size and --test-size");
      in.train_size = flags.train_size.value_or(dataset.split->train.size());
      in.test_size = flags.test_size.value_or(dataset.split->test.size());
    }
    in.feature_norm = frobenius_norm(dataset.features);
    ctx.corollary = flags.gcnii;
    ctx.report = ctx.corollary ? evaluate_corollary1(in) : evaluate_theorem1(in);
  }
  if (flags.out) {
    prepare_out_file(*flags.out, flags.force);
    write_file(*flags.out, bound_json(ctx));
  }
  out << bound_table(ctx);
  return kExitOk;
}

int cmd_generate(const std::string& kind, const GenerateFlags& flags, std::ostream& out) {
  const Dataset dataset =
      kind == "sbm" ? generate_sbm(flags.sbm) : generate_heterophilous(flags.hetero);
  prepare_out_dir(flags.out, flags.force);
  write_dataset(dataset, flags.out);
  out << dataset.name << " nodes " << dataset.num_nodes() << " edges "
      << dataset.graph.num_undirected_edges() << " classes " << dataset.num_classes
      << " homophily " << format_g17(edge_homophily(dataset)) << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateFlags& flags, std::ostream& out) {
  const fs::path run = flags.run;
  const ExperimentConfig config = load_config(run / "config.resolved.json");
  const Dataset dataset = prepare_dataset(config, load_dataset(config.dataset));
  const ModelSpec spec = model_spec(config, dataset);
  const ParameterSet params = parse_params_json(read_file(run / "params.json"), spec);
  const Split split = resolve_split(config, dataset);
  const Matrix log_probs = predict(spec, params, normalize_adjacency(dataset.graph), dataset.features);
  nlohmann::ordered_json doc;
  doc["train_accuracy"] = accuracy(log_probs, dataset.labels, split.train);
  doc["val_accuracy"] = accuracy(log_probs, dataset.labels, split.val);
  doc["test_accuracy"] = accuracy(log_probs, dataset.labels, split.test);
  out << doc.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep graph networks with adaptive generalized PageRank propagation", "adagpr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  TrainFlags train;
  auto* t = app.add_subcommand("train", "Train a model and write run artifacts");
  t->add_option("--config", train.config, "Experiment config JSON")->check(CLI::ExistingFile);
  t->add_option("--dataset", train.dataset, "Dataset directory");
  t->add_option("--model", train.model, "gcn, gcnii, gprgnn, adagpr or adagpr-uniform");
  t->add_option("--layers", train.layers, "Graph convolution layers L");
  t->add_option("--k", train.k, "GPR coefficients per layer K");
  t->add_option("--hidden", train.hidden, "Hidden width");
  t->add_option("--alpha", train.alpha, "Initial residual weight");
  t->add_option("--lambda", train.lambda, "Identity mapping strength");
  t->add_option("--dropout", train.dropout, "Dropout rate");
  t->add_option("--lr", train.lr, "Adam learning rate");
  t->add_option("--wd1", train.wd1, "L2 decay of the input layer");
  t->add_option("--wd2", train.wd2, "L2 decay of the hidden and output layers");
  t->add_option("--wd3", train.wd3, "L2 decay of the coefficient logits");
  t->add_option("--epochs", train.epochs, "Maximum epochs");
  t->add_option("--patience", train.patience, "Early stopping patience");
  t->add_option("--seed", train.seed, "Seed");
  t->add_option("--eval-every", train.eval_every, "Coefficient trace interval");
  t->add_option("--split", train.split, "auto, stored, standard or random");
  t->add_option("--out", train.out, "Output run directory");
  t->add_flag("--row-normalize", train.row_normalize, "L1-normalize feature rows");
  t->add_flag("--timing", train.timing, "Record wall-clock seconds in metrics.json");
  t->add_flag("--force", train.force, "Allow writing into a non-empty directory");

  CoeffsFlags coeffs;
  auto* c = app.add_subcommand("coeffs", "Print trained GPR coefficients of a run");
  c->add_option("--run", coeffs.run, "Run directory")->required();
  c->add_option("--layer", coeffs.layer, "Restrict to one layer (1-based)");
  c->add_flag("--evolution", coeffs.evolution, "Print the per-epoch trace instead of the final table");

  SpectrumFlags spec_flags;
  auto* s = app.add_subcommand("spectrum", "Eigenvalues of the normalized adjacency");
  s->add_option("--dataset", spec_flags.dataset, "Dataset directory")->required();
  s->add_option("--kmax", spec_flags.kmax, "Largest power in the profile");
  s->add_option("--mode", spec_flags.mode, "dense, auto or lanczos");
  s->add_option("--out", spec_flags.out, "Write spectrum.csv and profile.csv here");
  s->add_flag("--force", spec_flags.force, "Allow writing into a non-empty directory");

  BoundFlags bound;
  auto* b = app.add_subcommand("bound", "Evaluate the complexity index");
  b->add_option("--run", bound.run, "Run directory");
  b->add_option("--dataset", bound.dataset, "Dataset directory");
  b->add_option("--mu-file", bound.mu_file, "CSV with one coefficient row per layer");
  b->add_option("--alpha", bound.alpha, "Initial residual weight");
  b->add_option("--R", bound.r, "Output bound R");
  b->add_option("--delta", bound.delta, "Confidence parameter");
  b->add_option("--weights", bound.weights, "Comma-separated B^(0)..B^(L)");
  b->add_option("--layers", bound.layers, "Number of layers L");
  b->add_option("--train-size", bound.train_size, "M");
  b->add_option("--test-size", bound.test_size, "U");
  b->add_option("--mode", bound.mode, "Spectrum mode: dense, auto or lanczos");
  b->add_flag("--gcnii", bound.gcnii, "Use sum |lambda| for every layer");
  b->add_flag("--row-normalize", bound.row_normalize, "L1-normalize feature rows");
  b->add_flag("--allow-truncated", bound.allow_truncated, "Accept a truncated spectrum");
  b->add_option("--out", bound.out, "Write bound.json here");
  b->add_flag("--force", bound.force, "Overwrite --out");

  GenerateFlags gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic dataset");
  g->require_subcommand(1);
  auto* gs = g->add_subcommand("sbm", "Homophilous stochastic block model");
  gs->add_option("--out", gen.out, "Dataset directory")->required();
  gs->add_option("--n-per-block", gen.sbm.n_per_block, "Nodes per block");
  gs->add_option("--blocks", gen.sbm.num_blocks, "Blocks (classes)");
  gs->add_option("--p-in", gen.sbm.p_in, "Edge probability inside a block");
  gs->add_option("--p-out", gen.sbm.p_out, "Edge probability across blocks");
  gs->add_option("--features", gen.sbm.feature_dim, "Feature width");
  gs->add_option("--noise", gen.sbm.noise, "Feature noise standard deviation");
  gs->add_option("--seed", gen.sbm.seed, "Seed");
  gs->add_flag("--force", gen.force, "Allow writing into a non-empty directory");
  auto* gh = g->add_subcommand("heterophilous", "Block model with mostly cross-class edges");
  gh->add_option("--out", gen.out, "Dataset directory")->required();
  gh->add_option("--n", gen.hetero.n, "Nodes");
  gh->add_option("--classes", gen.hetero.num_classes, "Classes");
  gh->add_option("--features", gen.hetero.feature_dim, "Feature width");
  gh->add_option("--degree-in", gen.hetero.degree_in, "Expected same-class neighbours");
  gh->add_option("--degree-out", gen.hetero.degree_out, "Expected cross-class neighbours");
  gh->add_option("--noise", gen.hetero.noise, "Feature noise standard deviation");
  gh->add_option("--seed", gen.hetero.seed, "Seed");
  gh->add_flag("--force", gen.force, "Allow writing into a non-empty directory");

  EvaluateFlags eval;
  auto* e = app.add_subcommand("evaluate", "Accuracy of a trained run's saved parameters");
  e->add_option("--run", eval.run, "Run directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    app.exit(ex, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& ex) {
    app.exit(ex, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return kExitValidation;
  }

  try {
    if (t->parsed()) return cmd_train(train, out);
    if (c->parsed()) return cmd_coeffs(coeffs, out);
    if (s->parsed()) return cmd_spectrum(spec_flags, out, err);
    if (b->parsed()) return cmd_bound(bound, out);
    if (gs->parsed()) return cmd_generate("sbm", gen, out);
    if (gh->parsed()) return cmd_generate("heterophilous", gen, out);
    if (e->parsed()) return cmd_evaluate(eval, out);
  } catch (const TrainingDivergence& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitDivergence;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitValidation;
}

}  // namespace adagpr::cli

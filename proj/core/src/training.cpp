// SPDX-License-Identifier: Apache-2.0

#include "adagpr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "adagpr/autodiff.hpp"
#include "adagpr/error.hpp"
#include "adagpr/rng.hpp"

namespace adagpr {

void Split::validate(std::size_t num_nodes) const {
  require(!train.empty(), ErrorCode::kSplit, "training set is empty");
  std::vector<char> seen(num_nodes, 0);
  auto mark = [&](const std::vector<std::size_t>& nodes, const char* name) {
    for (std::size_t v : nodes) {
      require(v < num_nodes, ErrorCode::kSplit,
              std::string(name) + " node " + std::to_string(v) + " out of range");
      require(!seen[v], ErrorCode::kSplit,
              "node " + std::to_string(v) + " appears in more than one split set");
      seen[v] = 1;
    }
  };
  mark(train, "train");
  mark(val, "val");
  mark(test, "test");
}

namespace {

std::vector<std::vector<std::size_t>> nodes_by_class(std::span<const int> labels,
                                                     std::size_t num_classes) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < num_classes,
            ErrorCode::kSplit, "label of node " + std::to_string(i) + " out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return by_class;
}

}  // namespace

Split make_standard_split(std::span<const int> labels, std::size_t num_classes,
                          const StandardSplitOptions& options) {
  const auto by_class = nodes_by_class(labels, num_classes);
  std::vector<char> taken(labels.size(), 0);
  Split split;
  for (std::size_t c = 0; c < num_classes; ++c) {
    require(by_class[c].size() >= options.per_class, ErrorCode::kSplit,
            "class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                " nodes, fewer than per_class = " + std::to_string(options.per_class));
    for (std::size_t k = 0; k < options.per_class; ++k) {
      split.train.push_back(by_class[c][k]);
      taken[by_class[c][k]] = 1;
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::size_t cursor = 0;
  auto take = [&](std::size_t count, std::vector<std::size_t>& out, const char* name) {
    while (out.size() < count && cursor < labels.size()) {
      if (!taken[cursor]) {
        out.push_back(cursor);
        taken[cursor] = 1;
      }
      ++cursor;
    }
    require(out.size() == count, ErrorCode::kSplit,
            std::string("not enough unlabeled nodes for the ") + name + " set");
  };
  take(options.val_size, split.val, "validation");
  take(options.test_size, split.test, "test");
  return split;
}

Split make_random_split(std::span<const int> labels, std::size_t num_classes,
                        const RandomSplitOptions& options, std::uint64_t seed) {
  require(options.train > 0.0 && options.val >= 0.0 && options.test >= 0.0 &&
              options.train + options.val + options.test <= 1.0 + 1e-12,
          ErrorCode::kSplit, "split fractions must be non-negative and sum to at most 1");
  auto by_class = nodes_by_class(labels, num_classes);
  Rng rng(seed);
  Split split;
  const bool fills_all = std::abs(options.train + options.val + options.test - 1.0) <= 1e-12;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& nodes = by_class[c];
    // Fisher-Yates with our own draws so the split is identical across standard libraries.
    for (std::size_t i = nodes.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.next() % i);
      std::swap(nodes[i - 1], nodes[j]);
    }
    const double n = static_cast<double>(nodes.size());
    const auto n_train = static_cast<std::size_t>(std::llround(options.train * n));
    const auto n_val = std::min(nodes.size() - n_train,
                                static_cast<std::size_t>(std::llround(options.val * n)));
    const std::size_t rest = nodes.size() - n_train - n_val;
    const std::size_t n_test =
        fills_all ? rest : std::min(rest, static_cast<std::size_t>(std::llround(options.test * n)));
    require(n_train >= 1, ErrorCode::kSplit,
            "class " + std::to_string(c) + " is too small to contribute a training node");
    split.train.insert(split.train.end(), nodes.begin(), nodes.begin() + n_train);
    split.val.insert(split.val.end(), nodes.begin() + n_train, nodes.begin() + n_train + n_val);
    split.test.insert(split.test.end(), nodes.begin() + n_train + n_val,
                      nodes.begin() + n_train + n_val + n_test);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void TrainConfig::validate() const {
  require(lr > 0.0, ErrorCode::kParameter, "learning rate must be > 0");
  require(wd1 >= 0.0 && wd2 >= 0.0 && wd3 >= 0.0, ErrorCode::kParameter,
          "weight decays must be >= 0");
  require(max_epochs >= 1, ErrorCode::kParameter, "max_epochs must be >= 1");
  require(patience <= max_epochs, ErrorCode::kParameter, "patience must not exceed max_epochs");
  require(eval_every >= 1, ErrorCode::kParameter, "eval_every must be >= 1");
}

double TrainConfig::decay(ParamGroup group) const {
  switch (group) {
    case ParamGroup::kInitial: return wd1;
    case ParamGroup::kHidden: return wd2;
    case ParamGroup::kCoeff: return wd3;
  }
  return 0.0;
}

AdamState AdamState::zeros_like(const ParameterSet& params) {
  AdamState state;
  for (const auto& p : params.items) {
    state.first_moment.emplace_back(p.value.rows(), p.value.cols());
    state.second_moment.emplace_back(p.value.rows(), p.value.cols());
  }
  return state;
}

void adam_step(ParameterSet& params, std::span<const Matrix> grads, AdamState& state,
               std::size_t t, const AdamOptions& options) {
  const std::size_t count = params.items.size();
  require(grads.size() == count && state.first_moment.size() == count &&
              state.second_moment.size() == count,
          ErrorCode::kContract, "adam_step: parameter/gradient/state counts differ");
  require(t >= 1, ErrorCode::kContract, "adam_step: step index starts at 1");
  const double bias1 = 1.0 - std::pow(options.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(options.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < count; ++i) {
    auto& p = params.items[i];
    const std::size_t n = p.value.size();
    require(grads[i].size() == n && state.first_moment[i].size() == n &&
                state.second_moment[i].size() == n,
            ErrorCode::kContract, "adam_step: shape mismatch for " + p.name);
    const double wd = options.decay[static_cast<std::size_t>(p.group)];
    auto w = p.value.data();
    auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t j = 0; j < n; ++j) {
      const double grad = g[j] + wd * w[j];
      m[j] = options.beta1 * m[j] + (1.0 - options.beta1) * grad;
      v[j] = options.beta2 * v[j] + (1.0 - options.beta2) * grad * grad;
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      w[j] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

double accuracy(const Matrix& log_probs, std::span<const int> labels,
                std::span<const std::size_t> nodes) {
  if (nodes.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i : nodes) {
    const auto row = log_probs.row(i);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

Matrix predict(const ModelSpec& spec, const ParameterSet& params, const SparseMatrix& adjacency,
               const Matrix& features) {
  ad::Tape tape;
  Rng unused(0);
  return forward(tape, spec, params, adjacency, features, false, unused).log_probs.value();
}

namespace {

double masked_nll(const Matrix& log_probs, std::span<const int> labels,
                  std::span<const std::size_t> nodes) {
  double total = 0.0;
  for (std::size_t i : nodes) total -= log_probs(i, static_cast<std::size_t>(labels[i]));
  return total / static_cast<double>(nodes.size());
}

}  // namespace

FitResult fit(const ModelSpec& spec, const TrainConfig& config, const Graph& graph,
              const Matrix& features, std::span<const int> labels, const Split& split,
              const FitHooks& hooks) {
  const auto start = std::chrono::steady_clock::now();
  spec.validate();
  config.validate();
  require(labels.size() == graph.num_nodes() && features.rows() == graph.num_nodes(),
          ErrorCode::kDimension, "graph, features and labels disagree on node count");
  split.validate(graph.num_nodes());
  require(!split.val.empty(), ErrorCode::kSplit, "early stopping needs a validation set");
  for (int y : labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < spec.classes, ErrorCode::kInput,
            "label outside [0, classes)");
  }

  const SparseMatrix adjacency = normalize_adjacency(graph);
  Rng init_rng(derive_seed(config.seed, 0));
  Rng dropout_rng(derive_seed(config.seed, 1));

  FitResult result;
  ParameterSet params = init_parameters(spec, init_rng);
  AdamState state = AdamState::zeros_like(params);
  AdamOptions adam;
  adam.lr = config.lr;
  adam.decay = {config.wd1, config.wd2, config.wd3};

  Metrics& metrics = result.metrics;
  metrics.initial_val_loss = masked_nll(predict(spec, params, adjacency, features), labels, split.val);
  result.trace.push_back({0, coefficient_table(spec, params)});

  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  result.best = params;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<Matrix> grads;
    {
      ad::Tape tape;
      const auto out = forward(tape, spec, params, adjacency, features, true, dropout_rng);
      const ad::Var loss = ad::nll_loss_masked(out.log_probs, labels, split.train);
      const double train_loss = loss.value()(0, 0);
      if (!std::isfinite(train_loss)) throw TrainingDivergence(epoch, train_loss);
      metrics.train_loss.push_back(train_loss);
      const auto grad_set = tape.backward(loss);
      grads.reserve(out.params.size());
      for (std::size_t i = 0; i < out.params.size(); ++i) {
        const auto it = grad_set.find(out.params[i].id());
        grads.push_back(it != grad_set.end()
                            ? it->second
                            : Matrix(params.items[i].value.rows(), params.items[i].value.cols()));
      }
    }
    adam_step(params, grads, state, epoch, adam);
    if (hooks.after_step) hooks.after_step(epoch, params);
    for (const auto& item : params.items) {
      for (double w : item.value.data()) {
        if (!std::isfinite(w)) throw TrainingDivergence(epoch, std::numeric_limits<double>::quiet_NaN());
      }
    }

    const Matrix log_probs = predict(spec, params, adjacency, features);
    const double val_loss = masked_nll(log_probs, labels, split.val);
    if (!std::isfinite(val_loss)) throw TrainingDivergence(epoch, val_loss);
    metrics.val_loss.push_back(val_loss);
    metrics.val_accuracy.push_back(accuracy(log_probs, labels, split.val));
    metrics.epochs_run = epoch;
    if (epoch % config.eval_every == 0) {
      result.trace.push_back({epoch, coefficient_table(spec, params)});
    }

    if (val_loss < best_val) {
      best_val = val_loss;
      result.best = params;
      metrics.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= config.patience) break;
  }

  const Matrix best_log_probs = predict(spec, result.best, adjacency, features);
  metrics.test_accuracy = accuracy(best_log_probs, labels, split.test);
  result.final_coefficients = coefficient_table(spec, result.best);
  metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "adagpr/dataset.hpp"
#include "adagpr/error.hpp"
#include "adagpr/training.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace adagpr;

namespace {

ParameterSet scalar_params(double value, ParamGroup group = ParamGroup::kHidden) {
  ParameterSet p;
  p.items.push_back({"w", group, Matrix(1, 1, value)});
  return p;
}

Dataset separable_sbm(std::uint64_t seed) {
  SbmOptions o;
  o.n_per_block = 30;
  o.num_blocks = 2;
  o.p_in = 0.3;
  o.p_out = 0.01;
  o.feature_dim = 4;
  o.noise = 0.3;
  o.seed = seed;
  return generate_sbm(o);
}

ModelSpec small_adagpr(const Dataset& d) {
  ModelSpec s;
  s.variant = Variant::kAdagpr;
  s.layers = 2;
  s.order = 2;
  s.hidden = 16;
  s.classes = d.num_classes;
  s.features = d.features.cols();
  s.alpha = 0.1;
  s.lambda = 0.5;
  s.dropout = 0.2;
  return s;
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Adam, ZeroGradientZeroDecayLeavesParameters) {
  ParameterSet p = scalar_params(0.7);
  AdamState state = AdamState::zeros_like(p);
  const std::vector<Matrix> grads = {Matrix(1, 1, 0.0)};
  for (std::size_t t = 1; t <= 5; ++t) adam_step(p, grads, state, t, AdamOptions{});
  EXPECT_EQ(p.items[0].value(0, 0), 0.7);
}

TEST(Adam, FirstStepIsLearningRate) {
  ParameterSet p = scalar_params(0.0);
  AdamState state = AdamState::zeros_like(p);
  AdamOptions o;
  o.lr = 0.01;
  adam_step(p, std::vector<Matrix>{Matrix(1, 1, 1.0)}, state, 1, o);
  EXPECT_NEAR(p.items[0].value(0, 0), -0.01 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, QuadraticTrajectoryMatchesScalarOracle) {
  // f(w) = 0.5 * a * (w - b)^2 per coordinate, with decay on the hidden group.
  const double a = 3.0, b = -1.25;
  ParameterSet p;
  p.items.push_back({"w0", ParamGroup::kInitial, Matrix::from_rows({{0.4, -2.0}})});
  p.items.push_back({"w1", ParamGroup::kHidden, Matrix::from_rows({{1.5}})});
  AdamOptions o;
  o.lr = 0.05;
  o.decay = {0.0, 0.1, 0.0};
  AdamState state = AdamState::zeros_like(p);
  std::vector<oracle::ScalarAdam> scalar(3);
  std::vector<double> w = {0.4, -2.0, 1.5};
  for (auto& s : scalar) s.lr = 0.05;
  scalar[2].decay = 0.1;
  for (std::size_t t = 1; t <= 10; ++t) {
    std::vector<Matrix> grads;
    for (const auto& item : p.items) {
      Matrix g(item.value.rows(), item.value.cols());
      for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = a * (item.value.data()[i] - b);
      grads.push_back(g);
    }
    adam_step(p, grads, state, t, o);
    for (std::size_t i = 0; i < 3; ++i) w[i] = scalar[i].step(w[i], a * (w[i] - b), t);
  }
  EXPECT_NEAR(p.items[0].value(0, 0), w[0], 1e-12);
  EXPECT_NEAR(p.items[0].value(0, 1), w[1], 1e-12);
  EXPECT_NEAR(p.items[1].value(0, 0), w[2], 1e-12);
}

TEST(Adam, ShapeMismatchIsContractError) {
  ParameterSet p = scalar_params(1.0);
  AdamState state = AdamState::zeros_like(p);
  try {
    adam_step(p, std::vector<Matrix>{Matrix(2, 1)}, state, 1, AdamOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContract);
  }
}

TEST(Split, StandardSizes) {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 40; ++i) labels.push_back(c);
  const Split s = make_standard_split(labels, 3, {20, 10, 50});
  EXPECT_EQ(s.train.size(), 60u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.test.size(), 50u);
  EXPECT_NO_THROW(s.validate(labels.size()));
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 20; ++i) EXPECT_TRUE(as_set(s.train).count(static_cast<std::size_t>(c * 40 + i)));
  }
}

// Three classes of 30 leave only 30 non-training nodes, fewer than the 60 the
// validation and test sets ask for.
TEST(Split, StandardNeedsEnoughNodes) {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 30; ++i) labels.push_back(c);
  try {
    make_standard_split(labels, 3, {20, 10, 50});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSplit);
  }
  try {
    make_standard_split(labels, 3, {31, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSplit);
  }
}

TEST(Split, RandomFractions) {
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i % 4);
  const Split s = make_random_split(labels, 4, {}, 17);
  EXPECT_EQ(s.train.size(), 60u);
  EXPECT_EQ(s.val.size(), 20u);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_NO_THROW(s.validate(100));
  for (int c = 0; c < 4; ++c) {
    const auto count = std::count_if(s.train.begin(), s.train.end(),
                                     [&](std::size_t i) { return labels[i] == c; });
    EXPECT_NEAR(static_cast<double>(count), 15.0, 1.0);
  }
  EXPECT_EQ(make_random_split(labels, 4, {}, 17), s);
  EXPECT_NE(make_random_split(labels, 4, {}, 18), s);
}

TEST(Split, ValidateRejectsOverlap) {
  Split s{{0, 1}, {1}, {2}};
  EXPECT_THROW(s.validate(3), Error);
  Split empty{{}, {0}, {1}};
  EXPECT_THROW(empty.validate(3), Error);
  Split range{{0}, {1}, {5}};
  EXPECT_THROW(range.validate(3), Error);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.wd2 = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.patience = c.max_epochs + 1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Accuracy, TiesGoToLowestIndex) {
  const Matrix lp = Matrix::from_rows({{-0.5, -0.5}, {-1.0, -0.2}});
  const int labels[] = {0, 1};
  const std::size_t nodes[] = {0, 1};
  EXPECT_EQ(accuracy(lp, labels, nodes), 1.0);
  const int flipped[] = {1, 1};
  EXPECT_EQ(accuracy(lp, flipped, nodes), 0.5);
}

TEST(Fit, SeparableSbmReachesHighAccuracy) {
  const Dataset d = separable_sbm(1);
  const Split split = make_random_split(d.labels, 2, {}, 3);
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.patience = 200;
  cfg.seed = 5;
  const FitResult r = fit(small_adagpr(d), cfg, d.graph, d.features, d.labels, split);
  EXPECT_GE(r.metrics.test_accuracy, 0.95);
  EXPECT_LT(r.metrics.val_loss[r.metrics.best_epoch - 1], r.metrics.initial_val_loss);
  EXPECT_LE(r.metrics.best_epoch, r.metrics.epochs_run);

  const auto xd = testing_support::to_dense(d.features);
  EXPECT_GE(oracle::logistic_regression_accuracy(xd, d.labels, 2, split.train, split.test), 0.95);
}

TEST(Fit, PatienceZeroRunsOneEpoch) {
  const Dataset d = separable_sbm(2);
  const Split split = make_random_split(d.labels, 2, {}, 3);
  TrainConfig cfg;
  cfg.patience = 0;
  const FitResult r = fit(small_adagpr(d), cfg, d.graph, d.features, d.labels, split);
  EXPECT_EQ(r.metrics.epochs_run, 1u);
  EXPECT_EQ(r.metrics.best_epoch, 1u);
  EXPECT_EQ(r.metrics.val_loss.size(), 1u);
}

TEST(Fit, Reproducible) {
  const Dataset d = separable_sbm(3);
  const Split split = make_random_split(d.labels, 2, {}, 3);
  TrainConfig cfg;
  cfg.max_epochs = 60;
  cfg.patience = 60;
  cfg.seed = 11;
  const FitResult a = fit(small_adagpr(d), cfg, d.graph, d.features, d.labels, split);
  const FitResult b = fit(small_adagpr(d), cfg, d.graph, d.features, d.labels, split);
  EXPECT_EQ(a.metrics.train_loss, b.metrics.train_loss);
  EXPECT_EQ(a.metrics.val_loss, b.metrics.val_loss);
  EXPECT_EQ(a.metrics.test_accuracy, b.metrics.test_accuracy);
  EXPECT_EQ(a.final_coefficients, b.final_coefficients);
}

TEST(Fit, CoefficientTraceSchedule) {
  const Dataset d = separable_sbm(4);
  const Split split = make_random_split(d.labels, 2, {}, 3);
  TrainConfig cfg;
  cfg.max_epochs = 20;
  cfg.patience = 20;
  cfg.eval_every = 5;
  const FitResult r = fit(small_adagpr(d), cfg, d.graph, d.features, d.labels, split);
  std::vector<std::size_t> epochs;
  for (const auto& snap : r.trace) epochs.push_back(snap.epoch);
  EXPECT_EQ(epochs, (std::vector<std::size_t>{0, 5, 10, 15, 20}));
  for (const auto& snap : r.trace) {
    for (const auto& row : snap.coefficients) {
      double total = 0.0;
      for (double mu : row) {
        EXPECT_GE(mu, 0.0);
        total += mu;
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
  for (double mu : r.trace.front().coefficients.front()) EXPECT_DOUBLE_EQ(mu, 0.5);
}

// Corrupting the weights late in training must not change the reported test
// accuracy, which comes from the best validation snapshot.
TEST(Fit, TestAccuracyComesFromBestSnapshot) {
  const Dataset d = separable_sbm(5);
  const Split split = make_random_split(d.labels, 2, {}, 3);
  TrainConfig cfg;
  cfg.max_epochs = 80;
  cfg.patience = 80;
  FitHooks hooks;
  hooks.after_step = [](std::size_t epoch, ParameterSet& params) {
    if (epoch < 60) return;
    std::size_t i = 0;
    for (auto& item : params.items)
      for (double& w : item.value.data()) w = 3.0 * std::sin(12.9898 * static_cast<double>(++i + epoch));
  };
  const ModelSpec spec = small_adagpr(d);
  const FitResult r = fit(spec, cfg, d.graph, d.features, d.labels, split, hooks);
  EXPECT_LT(r.metrics.best_epoch, 60u);
  const Matrix lp = predict(spec, r.best, normalize_adjacency(d.graph), d.features);
  EXPECT_EQ(r.metrics.test_accuracy, accuracy(lp, d.labels, split.test));
  EXPECT_GE(r.metrics.test_accuracy, 0.9);
}

TEST(Fit, DivergenceCarriesEpoch) {
  const Dataset d = separable_sbm(6);
  const Split split = make_random_split(d.labels, 2, {}, 3);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.patience = 50;
  FitHooks hooks;
  hooks.after_step = [](std::size_t epoch, ParameterSet& params) {
    if (epoch == 7) params.items.front().value.data()[0] = std::nan("");
  };
  try {
    fit(small_adagpr(d), cfg, d.graph, d.features, d.labels, split, hooks);
    FAIL();
  } catch (const TrainingDivergence& e) {
    EXPECT_EQ(e.epoch(), 7u);
    EXPECT_EQ(e.code(), ErrorCode::kTrainingFailure);
  }
}

TEST(Fit, FrozenCoefficientsHaveNoCoeffParameters) {
  const Dataset d = separable_sbm(7);
  const Split split = make_random_split(d.labels, 2, {}, 3);
  ModelSpec spec = small_adagpr(d);
  spec.frozen_mu = CoefficientTable(2, {0.3, 0.7});
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.patience = 30;
  const FitResult base = fit(spec, cfg, d.graph, d.features, d.labels, split);
  for (const auto& item : base.best.items) EXPECT_NE(item.group, ParamGroup::kCoeff);
  cfg.wd3 = 1e3;
  const FitResult heavy = fit(spec, cfg, d.graph, d.features, d.labels, split);
  EXPECT_EQ(base.metrics.train_loss, heavy.metrics.train_loss);
  EXPECT_EQ(base.final_coefficients, CoefficientTable(2, {0.3, 0.7}));
}

TEST(Fit, CoefficientDecayDominates) {
  const Dataset d = separable_sbm(8);
  const Split split = make_random_split(d.labels, 2, {}, 3);
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.patience = 200;
  cfg.wd3 = 1e3;
  FitHooks hooks;
  double worst_final = 0.0;
  hooks.after_step = [&](std::size_t epoch, ParameterSet& params) {
    if (epoch != 200) return;
    for (const auto& item : params.items) {
      if (item.group == ParamGroup::kCoeff) worst_final = std::max(worst_final, frobenius_norm(item.value));
    }
  };
  fit(small_adagpr(d), cfg, d.graph, d.features, d.labels, split, hooks);
  EXPECT_LT(worst_final, 1e-2);
}

TEST(Fit, RequiresValidationSet) {
  const Dataset d = separable_sbm(9);
  Split split = make_random_split(d.labels, 2, {}, 3);
  split.test.insert(split.test.end(), split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  split.val.clear();
  EXPECT_THROW(fit(small_adagpr(d), TrainConfig{}, d.graph, d.features, d.labels, split), Error);
}

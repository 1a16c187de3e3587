// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "adagpr/dataset.hpp"
#include "adagpr/graph.hpp"
#include "adagpr/sparsemax.hpp"
#include "adagpr/training.hpp"

namespace {

adagpr::Dataset sbm(std::size_t n_per_block) {
  return adagpr::generate_sbm({.n_per_block = n_per_block, .num_blocks = 4, .p_in = 20.0 / n_per_block,
                               .p_out = 1.0 / n_per_block, .feature_dim = 16, .noise = 1.0, .seed = 1});
}

adagpr::Matrix random_features(std::size_t rows, std::size_t cols) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> dist;
  adagpr::Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(gen);
  return m;
}

void BM_Spmm(benchmark::State& state) {
  const auto d = sbm(static_cast<std::size_t>(state.range(0)));
  const auto a = adagpr::normalize_adjacency(d.graph);
  const auto x = random_features(a.n_rows, 64);
  for (auto _ : state) benchmark::DoNotOptimize(adagpr::spmm(a, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.nnz() * 64));
}
BENCHMARK(BM_Spmm)->Arg(250)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_SpmmParallel(benchmark::State& state) {
  const auto d = sbm(static_cast<std::size_t>(state.range(0)));
  const auto a = adagpr::normalize_adjacency(d.graph);
  const auto x = random_features(a.n_rows, 64);
  for (auto _ : state) benchmark::DoNotOptimize(adagpr::spmm(a, x, adagpr::ExecMode::kParallel));
}
BENCHMARK(BM_SpmmParallel)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_ApplyGpr(benchmark::State& state) {
  const auto d = sbm(500);
  const auto a = adagpr::normalize_adjacency(d.graph);
  const auto x = random_features(a.n_rows, 32);
  const std::vector<double> mu(static_cast<std::size_t>(state.range(0)), 1.0 / state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(adagpr::apply_gpr(a, mu, x));
}
BENCHMARK(BM_ApplyGpr)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_Sparsemax(benchmark::State& state) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> dist;
  std::vector<double> z(static_cast<std::size_t>(state.range(0)));
  for (double& v : z) v = dist(gen);
  for (auto _ : state) benchmark::DoNotOptimize(adagpr::sparsemax(z));
}
BENCHMARK(BM_Sparsemax)->Arg(4)->Arg(16)->Arg(256);

void BM_TrainEpoch(benchmark::State& state) {
  const auto d = sbm(250);
  const auto split = adagpr::make_random_split(d.labels, d.num_classes, {}, 1);
  adagpr::ModelSpec spec;
  spec.variant = adagpr::Variant::kAdagpr;
  spec.layers = static_cast<std::size_t>(state.range(0));
  spec.order = 4;
  spec.hidden = 32;
  spec.classes = d.num_classes;
  spec.features = d.features.cols();
  adagpr::TrainConfig cfg;
  cfg.max_epochs = 1;
  cfg.patience = 1;
  for (auto _ : state) benchmark::DoNotOptimize(adagpr::fit(spec, cfg, d.graph, d.features, d.labels, split));
}
BENCHMARK(BM_TrainEpoch)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>

#include "adagpr/config.hpp"
#include "adagpr/error.hpp"

using namespace adagpr;

namespace {

ErrorCode parse_code(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorCode::kInvariant;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const ExperimentConfig c = parse_config(R"({"dataset":"d","model":"gcnii","layers":8,"lr":0.05})");
  EXPECT_EQ(c.model, Variant::kGcnii);
  EXPECT_EQ(c.layers, 8u);
  EXPECT_EQ(c.train.lr, 0.05);
  EXPECT_EQ(c.hidden, 64u);
  EXPECT_EQ(c.split, SplitMode::kAuto);
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_EQ(parse_code(R"({"dataset":"d","layer":2})"), ErrorCode::kConfig);
  EXPECT_EQ(parse_code(R"({"dataset":"d","layers":"two"})"), ErrorCode::kConfig);
  EXPECT_EQ(parse_code(R"({"dataset":"d","layers":-1})"), ErrorCode::kConfig);
  EXPECT_EQ(parse_code("[1,2]"), ErrorCode::kConfig);
  EXPECT_EQ(parse_code("{"), ErrorCode::kConfig);
  EXPECT_EQ(parse_code(R"({"dataset":"d","split":"sideways"})"), ErrorCode::kConfig);
}

TEST(Config, RoundTrip) {
  ExperimentConfig c = parse_config(
      R"({"dataset":"/data/x","model":"adagpr","layers":3,"k":4,"alpha":0.3,"wd3":0.1,)"
      R"("frozen_mu":[[1,0,0,0],[0,1,0,0],[0,0,1,0]],"split":"standard","split_per_class":5,)"
      R"("row_normalize":true,"seed":42})");
  const std::string text = to_json(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(to_json(back), text);
  EXPECT_EQ(back.frozen_mu, c.frozen_mu);
  EXPECT_EQ(back.standard.per_class, 5u);
  EXPECT_EQ(back.train.seed, 42u);
  for (std::string_view key : config_keys())
    EXPECT_NE(text.find("\"" + std::string(key) + "\""), std::string::npos) << key;
}

TEST(Config, ModelSpecFromDataset) {
  Dataset d = generate_sbm({.n_per_block = 5, .num_blocks = 2, .feature_dim = 3, .seed = 1});
  ExperimentConfig c = parse_config(R"({"dataset":"d","model":"adagpr-uniform","k":3,"layers":2})");
  const ModelSpec spec = model_spec(c, d);
  EXPECT_EQ(spec.classes, 2u);
  EXPECT_EQ(spec.features, 3u);
  EXPECT_EQ(spec.order, 3u);
  EXPECT_EQ(spec.variant, Variant::kAdagprUniform);
}

TEST(Config, SplitResolution) {
  Dataset d = generate_sbm({.n_per_block = 30, .num_blocks = 2, .feature_dim = 2, .seed = 1});
  ExperimentConfig c = parse_config(R"({"dataset":"d","seed":3})");
  const Split random = resolve_split(c, d);
  EXPECT_EQ(random.train.size(), 36u);
  d.split = Split{{0, 1}, {2}, {3}};
  EXPECT_EQ(resolve_split(c, d), *d.split);
  c.split = SplitMode::kRandom;
  EXPECT_EQ(resolve_split(c, d), random);
  c.split = SplitMode::kStandard;
  c.standard = {5, 10, 20};
  EXPECT_EQ(resolve_split(c, d).train.size(), 10u);
  d.split.reset();
  c.split = SplitMode::kStored;
  EXPECT_THROW(resolve_split(c, d), Error);
}

TEST(Config, PrepareDatasetNormalizesRows) {
  Dataset d = generate_sbm({.n_per_block = 5, .num_blocks = 2, .feature_dim = 3, .seed = 1});
  ExperimentConfig c = parse_config(R"({"dataset":"d","row_normalize":true})");
  const Dataset p = prepare_dataset(c, d);
  for (std::size_t i = 0; i < p.num_nodes(); ++i) {
    double total = 0.0;
    for (double v : p.features.row(i)) total += std::abs(v);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Config, ShippedConfigsParse) {
  const std::filesystem::path dir = std::filesystem::path(ADAGPR_SOURCE_DIR) / "configs";
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    EXPECT_NO_THROW(load_config(entry.path()).validate()) << entry.path();
  }
  EXPECT_GE(count, 3u);
  const ExperimentConfig cora = load_config(dir / "cora.json");
  EXPECT_EQ(cora.layers, 8u);
  EXPECT_EQ(cora.k, 4u);
  EXPECT_EQ(cora.hidden, 32u);
  EXPECT_EQ(cora.alpha, 0.1);
  EXPECT_TRUE(cora.row_normalize);
}

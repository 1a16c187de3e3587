// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "adagpr/dataset.hpp"
#include "adagpr/error.hpp"
#include "helpers.hpp"

using namespace adagpr;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path two_node_fixture(const std::string& tag) {
  const fs::path dir = testing_support::temp_dir("dataset_" + tag);
  write(dir / "graph.edges", "# two nodes\n0\t1\n");
  write(dir / "features.csv", "1,0\n0,1\n");
  write(dir / "labels.csv", "0\n1\n");
  return dir;
}

DatasetIssue load_issue(const fs::path& dir) {
  try {
    load_dataset(dir);
  } catch (const DatasetError& e) {
    return e.issue();
  }
  ADD_FAILURE() << "dataset loaded without error";
  return DatasetIssue::kMalformed;
}

}  // namespace

TEST(LoadDataset, MinimalTwoNodes) {
  const Dataset d = load_dataset(two_node_fixture("minimal"));
  EXPECT_EQ(d.num_nodes(), 2u);
  EXPECT_EQ(d.num_classes, 2u);
  EXPECT_EQ(d.features.cols(), 2u);
  EXPECT_FALSE(d.split.has_value());
  const Matrix a = normalize_adjacency(d.graph).to_dense();
  for (double v : a.data()) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(LoadDataset, DistinctDiagnostics) {
  fs::path dir = two_node_fixture("label");
  write(dir / "labels.csv", "0\n2\n");
  // max label + 1 = 3 classes leaves class 1 empty
  EXPECT_EQ(load_issue(dir), DatasetIssue::kLabelRange);

  dir = two_node_fixture("negative");
  write(dir / "labels.csv", "0\n-1\n");
  EXPECT_EQ(load_issue(dir), DatasetIssue::kLabelRange);

  dir = two_node_fixture("ragged");
  write(dir / "features.csv", "1,0\n0\n");
  EXPECT_EQ(load_issue(dir), DatasetIssue::kRaggedFeatures);

  dir = two_node_fixture("node");
  write(dir / "graph.edges", "0\t2\n");
  EXPECT_EQ(load_issue(dir), DatasetIssue::kNodeRange);

  dir = two_node_fixture("missing");
  fs::remove(dir / "features.csv");
  EXPECT_EQ(load_issue(dir), DatasetIssue::kMissingFile);

  dir = two_node_fixture("rows");
  write(dir / "features.csv", "1,0\n0,1\n1,1\n");
  EXPECT_EQ(load_issue(dir), DatasetIssue::kRowCount);

  dir = two_node_fixture("malformed");
  write(dir / "graph.edges", "0\tx\n");
  EXPECT_EQ(load_issue(dir), DatasetIssue::kMalformed);

  dir = two_node_fixture("split");
  write(dir / "split.json", R"({"train":[0],"val":[0],"test":[1]})");
  EXPECT_EQ(load_issue(dir), DatasetIssue::kSplit);
}

TEST(LoadDataset, MessagesNameTheIssue) {
  const fs::path dir = two_node_fixture("message");
  write(dir / "labels.csv", "0\n5\n");
  try {
    load_dataset(dir);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("label-range:"), std::string::npos) << e.what();
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(LoadDataset, SymmetrizesAndDeduplicates) {
  const fs::path dir = testing_support::temp_dir("dataset_sym");
  write(dir / "graph.edges", "0\t1\n1\t0\n1\t2\n# c\n2\t2\n");
  write(dir / "features.csv", "1\n2\n3\n");
  write(dir / "labels.csv", "0\n1\n0\n");
  write(dir / "split.json", R"({"test":[2],"train":[1,0],"val":[]})");
  const Dataset d = load_dataset(dir);
  EXPECT_EQ(d.graph.num_undirected_edges(), 2u);
  ASSERT_TRUE(d.split.has_value());
  EXPECT_EQ(d.split->train, (std::vector<std::size_t>{0, 1}));
}

TEST(WriteDataset, RoundTripIsByteIdentical) {
  Dataset d = generate_sbm({.n_per_block = 10, .num_blocks = 2, .p_in = 0.4, .p_out = 0.05,
                            .feature_dim = 3, .noise = 0.7, .seed = 9});
  d.split = make_random_split(d.labels, d.num_classes, {}, 1);
  const fs::path first = testing_support::temp_dir("roundtrip_a");
  const fs::path second = testing_support::temp_dir("roundtrip_b");
  write_dataset(d, first);
  const Dataset loaded = load_dataset(first);
  EXPECT_EQ(loaded.features, d.features);
  EXPECT_EQ(loaded.labels, d.labels);
  EXPECT_EQ(loaded.graph.edges(), d.graph.edges());
  EXPECT_EQ(loaded.split, d.split);
  write_dataset(loaded, second);
  for (const char* name : {"graph.edges", "features.csv", "labels.csv", "split.json"})
    EXPECT_EQ(slurp(first / name), slurp(second / name)) << name;
}

TEST(Generators, DisjointCliques) {
  const Dataset d = generate_sbm({.n_per_block = 5, .num_blocks = 2, .p_in = 1.0, .p_out = 0.0,
                                  .feature_dim = 2, .noise = 0.0, .seed = 1});
  EXPECT_EQ(d.graph.num_undirected_edges(), 20u);
  const Matrix a = normalize_adjacency(d.graph).to_dense();
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      if (d.labels[i] != d.labels[j]) EXPECT_EQ(a(i, j), 0.0);
      else EXPECT_NEAR(a(i, j), 0.2, 1e-15);
    }
}

TEST(Generators, NoiselessFeaturesAreClassMeans) {
  const Dataset d = generate_sbm({.n_per_block = 4, .num_blocks = 3, .p_in = 0.5, .p_out = 0.1,
                                  .feature_dim = 5, .noise = 0.0, .seed = 2});
  for (std::size_t i = 0; i < d.num_nodes(); ++i)
    for (std::size_t j = 0; j < 5; ++j)
      EXPECT_EQ(d.features(i, j), static_cast<int>(j) == d.labels[i] ? 1.0 : 0.0);
}

TEST(Generators, SeededDeterminism) {
  const SbmOptions o{.n_per_block = 15, .num_blocks = 3, .p_in = 0.3, .p_out = 0.05,
                     .feature_dim = 4, .noise = 1.0, .seed = 3};
  const Dataset a = generate_sbm(o), b = generate_sbm(o);
  EXPECT_EQ(a.graph.edges(), b.graph.edges());
  EXPECT_EQ(a.features, b.features);
  SbmOptions other = o;
  other.seed = 4;
  EXPECT_NE(generate_sbm(other).graph.edges(), a.graph.edges());

  const HeterophilousOptions h{.n = 40, .feature_dim = 4, .seed = 5};
  const Dataset c = generate_heterophilous(h), e = generate_heterophilous(h);
  EXPECT_EQ(c.graph.edges(), e.graph.edges());
  EXPECT_EQ(c.features, e.features);
}

TEST(Generators, Validation) {
  EXPECT_THROW(generate_sbm({.n_per_block = 0}), Error);
  EXPECT_THROW(generate_sbm({.p_in = 1.5}), Error);
  EXPECT_THROW(generate_sbm({.num_blocks = 3, .feature_dim = 2}), Error);
  EXPECT_THROW(generate_heterophilous({.n = 3}), Error);
  EXPECT_THROW(generate_heterophilous({.n = 40, .degree_in = 5.0, .degree_out = 1.0}), Error);
}

TEST(Generators, OutputsValidate) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_NO_THROW(generate_sbm({.seed = seed}).validate());
    EXPECT_NO_THROW(generate_heterophilous({.seed = seed}).validate());
  }
}

TEST(Generators, HomophilyDirection) {
  double homophilous = 0.0, heterophilous = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    homophilous += edge_homophily(generate_sbm({.p_in = 0.2, .p_out = 0.005, .seed = seed}));
    heterophilous += edge_homophily(generate_heterophilous({.seed = seed}));
  }
  EXPECT_GT(homophilous / 10.0, 0.5);
  EXPECT_LT(heterophilous / 10.0, 0.5);
}

TEST(RowNormalize, L1Rows) {
  Matrix m = Matrix::from_rows({{1.0, -3.0}, {0.0, 0.0}});
  row_normalize(m);
  EXPECT_EQ(m, Matrix::from_rows({{0.25, -0.75}, {0.0, 0.0}}));
}

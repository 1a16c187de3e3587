// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adagpr/dense.hpp"
#include "adagpr/error.hpp"
#include "adagpr/graph.hpp"
#include "adagpr/training.hpp"

namespace adagpr {

enum class DatasetIssue {
  kMissingFile,
  kMalformed,
  kRaggedFeatures,
  kRowCount,
  kLabelRange,
  kNodeRange,
  kSplit,
};

std::string_view to_string(DatasetIssue issue);

class DatasetError : public Error {
 public:
  DatasetError(DatasetIssue issue, const std::string& message);
  [[nodiscard]] DatasetIssue issue() const noexcept { return issue_; }

 private:
  DatasetIssue issue_;
};

struct Dataset {
  std::string name;
  Graph graph;
  Matrix features;  // N×q
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::optional<Split> split;

  [[nodiscard]] std::size_t num_nodes() const { return graph.num_nodes(); }
  /// Row counts agree and labels cover [0, c) with no empty class.
  void validate() const;
};

/// Reads graph.edges, features.csv, labels.csv and an optional split.json.
/// The class count is one past the largest label.
Dataset load_dataset(const std::filesystem::path& dir);

/// Canonical form: each undirected edge once as `u<TAB>v` with u < v in
/// ascending order, features in shortest round-trip notation.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Divides each feature row by its L1 norm (all-zero rows stay zero).
void row_normalize(Matrix& features);

struct SbmOptions {
  std::size_t n_per_block = 100;
  std::size_t num_blocks = 3;
  double p_in = 0.1;
  double p_out = 0.01;
  std::size_t feature_dim = 8;
  double noise = 1.0;  // standard deviation of the Gaussian feature noise
  std::uint64_t seed = 0;
};

/// Stochastic block model. Block b has feature mean e_b (needs
/// feature_dim >= num_blocks); labels are block ids.
Dataset generate_sbm(const SbmOptions& options);

struct HeterophilousOptions {
  std::size_t n = 200;
  std::size_t feature_dim = 8;
  std::uint64_t seed = 0;
  std::size_t num_classes = 4;
  /// Expected neighbours of a node inside / outside its own class.
  double degree_in = 0.5;
  double degree_out = 4.0;
  double noise = 1.0;
};

/// Block model with p_out > p_in, so most edges join different classes.
Dataset generate_heterophilous(const HeterophilousOptions& options);

/// Fraction of edge endpoints whose neighbour has the same label.
double edge_homophily(const Dataset& dataset);

}  // namespace adagpr

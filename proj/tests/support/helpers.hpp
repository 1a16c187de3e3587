// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "adagpr/dense.hpp"
#include "adagpr/graph.hpp"
#include "oracles.hpp"

namespace testing_support {

inline oracle::Dense to_dense(const adagpr::Matrix& m) {
  oracle::Dense out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

inline adagpr::Matrix from_dense(const oracle::Dense& d) {
  adagpr::Matrix m(d.size(), d.empty() ? 0 : d[0].size());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = d[r][c];
  return m;
}

inline double max_abs_diff(const oracle::Dense& a, const oracle::Dense& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  return worst;
}

inline adagpr::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen,
                                    double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  adagpr::Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(gen);
  return m;
}

/// Erdős–Rényi edge list (u < v).
inline std::vector<adagpr::Edge> random_edges(std::size_t n, double p, std::mt19937_64& gen) {
  std::bernoulli_distribution coin(p);
  std::vector<adagpr::Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (coin(gen)) edges.emplace_back(static_cast<adagpr::NodeId>(u), static_cast<adagpr::NodeId>(v));
  return edges;
}

inline std::vector<std::pair<std::size_t, std::size_t>> as_pairs(const std::vector<adagpr::Edge>& edges) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (auto [u, v] : edges) out.emplace_back(u, v);
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 gen(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() /
             ("adagpr-" + tag + "-" + std::to_string(gen() % 1000000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support

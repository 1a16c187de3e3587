// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "adagpr/dense.hpp"

namespace adagpr {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected, unweighted graph on nodes [0, num_nodes).
///
/// The constructor canonicalizes its input: ids are range-checked, every edge
/// is mirrored, duplicates and self-loops are dropped, and the list is sorted.
/// Self-loops are dropped because normalize_adjacency adds exactly one per
/// node regardless of the input.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t num_nodes, std::span<const Edge> edges);

  [[nodiscard]] std::size_t num_nodes() const noexcept { return num_nodes_; }
  /// Directed pairs, both orientations of every undirected edge, sorted.
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] std::size_t num_undirected_edges() const noexcept { return edges_.size() / 2; }

  /// Relabels node v as perm[v].
  [[nodiscard]] Graph permuted(std::span<const NodeId> perm) const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
};

/// Compressed sparse row matrix with f64 entries.
struct SparseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col_idx;
  std::vector<double> vals;

  [[nodiscard]] std::size_t nnz() const noexcept { return vals.size(); }

  static SparseMatrix identity(std::size_t n);
  /// Builds CSR from (row, col, value) triplets; duplicate positions are summed.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets);

  /// Throws kStructural when the CSR arrays are inconsistent.
  void validate() const;
  [[nodiscard]] Matrix to_dense() const;
  [[nodiscard]] bool is_symmetric(double tol) const;
  /// Entry lookup by binary search within the row; 0 when absent.
  [[nodiscard]] double at(std::size_t r, std::size_t c) const;
};

enum class ExecMode {
  kSequential,
  /// Row-partitioned across hardware threads. Opt-in; callers must not rely
  /// on bitwise reproducibility in this mode.
  kParallel,
};

/// Ã = D̂^{-1/2} (A + I) D̂^{-1/2}. Throws kEmptyGraph for N = 0.
SparseMatrix normalize_adjacency(const Graph& graph);

/// a * x.
Matrix spmm(const SparseMatrix& a, const Matrix& x, ExecMode mode = ExecMode::kSequential);
/// a^T * x, without materializing the transpose.
Matrix spmm_transposed(const SparseMatrix& a, const Matrix& x);

/// [x, a x, a² x, ..., a^{count-1} x] by repeated SpMM.
std::vector<Matrix> propagate_powers(const SparseMatrix& a, const Matrix& x, std::size_t count);

/// Σ_k weights[k] * terms[k]. Zero weights are skipped, so a one-hot weight
/// vector reproduces its term bit for bit.
Matrix weighted_sum(std::span<const double> weights, std::span<const Matrix> terms);

/// (Σ_k mu_k Ã^k) x via iterated SpMM; powers of Ã are never formed.
/// Throws kInvalidOrder when mu is empty.
Matrix apply_gpr(const SparseMatrix& a, std::span<const double> mu, const Matrix& x);

}  // namespace adagpr

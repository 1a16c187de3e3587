// SPDX-License-Identifier: Apache-2.0

#include "adagpr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <tuple>

#include "adagpr/error.hpp"

namespace adagpr {

Graph::Graph(std::size_t num_nodes, std::span<const Edge> edges) : num_nodes_(num_nodes) {
  edges_.reserve(edges.size() * 2);
  for (const auto& [src, dst] : edges) {
    if (src >= num_nodes || dst >= num_nodes) {
      fail(ErrorCode::kStructural, "edge (" + std::to_string(src) + "," + std::to_string(dst) +
                                       ") references a node outside [0, " +
                                       std::to_string(num_nodes) + ")");
    }
    if (src == dst) continue;
    edges_.emplace_back(src, dst);
    edges_.emplace_back(dst, src);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

Graph Graph::permuted(std::span<const NodeId> perm) const {
  require(perm.size() == num_nodes_, ErrorCode::kDimension, "permutation size mismatch");
  std::vector<Edge> relabeled;
  relabeled.reserve(edges_.size());
  for (const auto& [u, v] : edges_) relabeled.emplace_back(perm[u], perm[v]);
  return Graph(num_nodes_, relabeled);
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m;
  m.n_rows = m.n_cols = n;
  m.row_ptr.resize(n + 1);
  m.col_idx.resize(n);
  m.vals.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) m.row_ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) m.col_idx[i] = i;
  return m;
}

SparseMatrix SparseMatrix::from_triplets(
    std::size_t n_rows, std::size_t n_cols,
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets) {
  for (const auto& [r, c, v] : triplets) {
    require(r < n_rows && c < n_cols, ErrorCode::kStructural, "triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  SparseMatrix m;
  m.n_rows = n_rows;
  m.n_cols = n_cols;
  m.row_ptr.assign(n_rows + 1, 0);
  std::size_t prev_r = n_rows;
  std::size_t prev_c = n_cols;
  for (const auto& [r, c, v] : triplets) {
    if (r == prev_r && c == prev_c) {
      m.vals.back() += v;
      continue;
    }
    m.col_idx.push_back(c);
    m.vals.push_back(v);
    ++m.row_ptr[r + 1];
    prev_r = r;
    prev_c = c;
  }
  for (std::size_t r = 0; r < n_rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  m.validate();
  return m;
}

void SparseMatrix::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kStructural, "CSR: " + what); };
  if (row_ptr.size() != n_rows + 1) bad("row_ptr length != n_rows + 1");
  if (row_ptr.front() != 0) bad("row_ptr[0] != 0");
  if (row_ptr.back() != vals.size() || col_idx.size() != vals.size()) bad("nnz mismatch");
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) bad("row_ptr decreasing at row " + std::to_string(r));
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      if (col_idx[p] >= n_cols) bad("column index out of range in row " + std::to_string(r));
      if (p > row_ptr[r] && col_idx[p] <= col_idx[p - 1]) {
        bad("column indices not strictly increasing in row " + std::to_string(r));
      }
    }
  }
}

Matrix SparseMatrix::to_dense() const {
  Matrix out(n_rows, n_cols);
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) out(r, col_idx[p]) = vals[p];
  return out;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  const auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
  const auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return vals[static_cast<std::size_t>(it - col_idx.begin())];
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (n_rows != n_cols) return false;
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      if (std::abs(vals[p] - at(col_idx[p], r)) > tol) return false;
    }
  }
  return true;
}

SparseMatrix normalize_adjacency(const Graph& graph) {
  const std::size_t n = graph.num_nodes();
  require(n >= 1, ErrorCode::kEmptyGraph, "normalize_adjacency needs at least one node");
  const auto& edges = graph.edges();

  // Degree of Â = A + I counts the self-loop once.
  std::vector<double> degree(n, 1.0);
  for (const auto& [u, v] : edges) degree[u] += 1.0;
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  SparseMatrix m;
  m.n_rows = m.n_cols = n;
  m.row_ptr.assign(n + 1, 0);
  m.col_idx.reserve(edges.size() + n);
  m.vals.reserve(edges.size() + n);
  std::size_t e = 0;
  for (std::size_t r = 0; r < n; ++r) {
    bool diagonal_done = false;
    auto emit_diagonal = [&] {
      m.col_idx.push_back(r);
      m.vals.push_back(inv_sqrt[r] * inv_sqrt[r]);
      diagonal_done = true;
    };
    for (; e < edges.size() && edges[e].first == r; ++e) {
      const std::size_t c = edges[e].second;
      if (!diagonal_done && c > r) emit_diagonal();
      m.col_idx.push_back(c);
      m.vals.push_back(inv_sqrt[r] * inv_sqrt[c]);
    }
    if (!diagonal_done) emit_diagonal();
    m.row_ptr[r + 1] = m.vals.size();
  }
  return m;
}

namespace {

void spmm_rows(const SparseMatrix& a, const Matrix& x, Matrix& out, std::size_t begin,
               std::size_t end) {
  const std::size_t m = x.cols();
  for (std::size_t r = begin; r < end; ++r) {
    double* out_row = out.row(r).data();
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      const double w = a.vals[p];
      const double* x_row = x.row(a.col_idx[p]).data();
      for (std::size_t j = 0; j < m; ++j) out_row[j] += w * x_row[j];
    }
  }
}

}  // namespace

Matrix spmm(const SparseMatrix& a, const Matrix& x, ExecMode mode) {
  if (a.n_cols != x.rows()) {
    fail(ErrorCode::kDimension, "spmm: sparse " + std::to_string(a.n_rows) + "x" +
                                    std::to_string(a.n_cols) + " * dense " +
                                    std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
  Matrix out(a.n_rows, x.cols());
  const std::size_t workers =
      mode == ExecMode::kParallel ? std::max(1u, std::thread::hardware_concurrency()) : 1;
  if (workers == 1 || a.n_rows < 2 * workers) {
    spmm_rows(a, x, out, 0, a.n_rows);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (a.n_rows + workers - 1) / workers;
  for (std::size_t begin = 0; begin < a.n_rows; begin += chunk) {
    const std::size_t end = std::min(a.n_rows, begin + chunk);
    pool.emplace_back([&, begin, end] { spmm_rows(a, x, out, begin, end); });
  }
  return out;
}

Matrix spmm_transposed(const SparseMatrix& a, const Matrix& x) {
  if (a.n_rows != x.rows()) {
    fail(ErrorCode::kDimension, "spmm_transposed: sparse^T " + std::to_string(a.n_cols) + "x" +
                                    std::to_string(a.n_rows) + " * dense " +
                                    std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
  Matrix out(a.n_cols, x.cols());
  const std::size_t m = x.cols();
  for (std::size_t r = 0; r < a.n_rows; ++r) {
    const double* x_row = x.row(r).data();
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      const double w = a.vals[p];
      double* out_row = out.row(a.col_idx[p]).data();
      for (std::size_t j = 0; j < m; ++j) out_row[j] += w * x_row[j];
    }
  }
  return out;
}

std::vector<Matrix> propagate_powers(const SparseMatrix& a, const Matrix& x, std::size_t count) {
  std::vector<Matrix> powers;
  powers.reserve(count);
  if (count == 0) return powers;
  powers.push_back(x);
  for (std::size_t k = 1; k < count; ++k) powers.push_back(spmm(a, powers.back()));
  return powers;
}

Matrix weighted_sum(std::span<const double> weights, std::span<const Matrix> terms) {
  require(!weights.empty() && weights.size() <= terms.size(), ErrorCode::kDimension,
          "weighted_sum: weights/terms length mismatch");
  Matrix out;
  bool started = false;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0) continue;
    if (!started) {
      out = scaled(terms[k], weights[k]);
      started = true;
    } else {
      axpy(weights[k], terms[k], out);
    }
  }
  if (!started) out = Matrix(terms[0].rows(), terms[0].cols());
  return out;
}

Matrix apply_gpr(const SparseMatrix& a, std::span<const double> mu, const Matrix& x) {
  require(!mu.empty(), ErrorCode::kInvalidOrder, "GPR order K must be >= 1");
  // Only powers up to the last nonzero coefficient contribute.
  std::size_t needed = 0;
  for (std::size_t k = 0; k < mu.size(); ++k)
    if (mu[k] != 0.0) needed = k + 1;
  if (needed == 0) {
    if (a.n_cols != x.rows()) fail(ErrorCode::kDimension, "apply_gpr: shape mismatch");
    return Matrix(x.rows(), x.cols());
  }
  const auto powers = propagate_powers(a, x, needed);
  return weighted_sum(mu.first(needed), powers);
}

}  // namespace adagpr

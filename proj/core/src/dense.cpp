// SPDX-License-Identifier: Apache-2.0

#include "adagpr/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adagpr/error.hpp"

namespace adagpr {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::kDimension, std::string(op) + ": " + shape(a) + " vs " + shape(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require(values_.size() == rows * cols, ErrorCode::kDimension,
          "matrix " + std::to_string(rows) + "x" + std::to_string(cols) + " given " +
              std::to_string(values_.size()) + " values");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(n * m);
  for (const auto& r : rows) {
    require(r.size() == m, ErrorCode::kDimension, "ragged initializer rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Matrix(n, m, std::move(values));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

void Matrix::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    fail(ErrorCode::kDimension, "matmul: " + shape(a) + " * " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i).data();
    const double* a_row = a.row(i).data();
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a_row[k];
      if (aik == 0.0) continue;
      const double* b_row = b.row(k).data();
      for (std::size_t j = 0; j < m; ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    fail(ErrorCode::kDimension, "matmul_tn: " + shape(a) + "^T * " + shape(b));
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t m = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* a_row = a.row(r).data();
    const double* b_row = b.row(r).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ari = a_row[i];
      if (ari == 0.0) continue;
      double* out_row = out.row(i).data();
      for (std::size_t j = 0; j < m; ++j) out_row[j] += ari * b_row[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    fail(ErrorCode::kDimension, "matmul_nt: " + shape(a) + " * " + shape(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto a_row = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto b_row = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a_row[k] * b_row[k];
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
  require_same_shape(x, y, "axpy");
  auto xs = x.data();
  auto ys = y.data();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] += alpha * xs[i];
}

Matrix scaled(const Matrix& a, double alpha) {
  Matrix out = a;
  for (double& v : out.data()) v *= alpha;
  return out;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_dot");
  double acc = 0.0;
  auto as = a.data();
  auto bs = b.data();
  for (std::size_t i = 0; i < as.size(); ++i) acc += as[i] * bs[i];
  return acc;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(frobenius_dot(a, a)); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  auto as = a.data();
  auto bs = b.data();
  for (std::size_t i = 0; i < as.size(); ++i) worst = std::max(worst, std::abs(as[i] - bs[i]));
  return worst;
}

}  // namespace adagpr

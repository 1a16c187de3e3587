// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace adagpr {

/// Row-major dense matrix of doubles. Vectors are 1xK or Kx1 matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  static Matrix row_vector(std::span<const double> values);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) {
    return {values_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  [[nodiscard]] std::span<double> data() noexcept { return values_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return values_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

  void fill(double value);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// All kernels below check shapes and throw ErrorCode::kDimension on mismatch.

/// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// y += alpha * x
void axpy(double alpha, const Matrix& x, Matrix& y);
Matrix scaled(const Matrix& a, double alpha);

double frobenius_dot(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);
/// max_ij |a_ij - b_ij|; shapes must agree
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace adagpr

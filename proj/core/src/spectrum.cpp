// SPDX-License-Identifier: Apache-2.0

#include "adagpr/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "adagpr/error.hpp"

namespace adagpr {

std::string_view to_string(SpectrumMethod method) {
  return method == SpectrumMethod::kDense ? "dense" : "lanczos-truncated";
}

namespace {

constexpr double kSymmetryTol = 1e-12;

Spectrum dense_spectrum(const SparseMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.n_rows);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < a.n_rows; ++r)
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p)
      dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a.col_idx[p])) = a.vals[p];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorCode::kNumeric, "dense eigensolver failed");

  Spectrum s;
  s.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), std::greater<>());
  s.method = SpectrumMethod::kDense;
  s.dimension = a.n_rows;
  s.truncation_count = a.n_rows;
  return s;
}

void spmv(const SparseMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  for (std::size_t r = 0; r < a.n_rows; ++r) {
    double acc = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p)
      acc += a.vals[p] * x(static_cast<Eigen::Index>(a.col_idx[p]));
    y(static_cast<Eigen::Index>(r)) = acc;
  }
}

}  // namespace

Spectrum lanczos_spectrum(const SparseMatrix& a, const LanczosOptions& options) {
  require(a.n_rows == a.n_cols && a.n_rows > 0, ErrorCode::kDimension,
          "lanczos needs a non-empty square matrix");
  const auto n = static_cast<Eigen::Index>(a.n_rows);
  const auto steps = static_cast<Eigen::Index>(std::min<std::size_t>(options.max_steps, a.n_rows));

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd basis(n, steps);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = normal(rng);
  q.normalize();

  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples q_j and q_{j+1}
  Eigen::VectorXd w(n);
  Eigen::Index used = 0;
  for (Eigen::Index j = 0; j < steps; ++j) {
    basis.col(j) = q;
    used = j + 1;
    spmv(a, q, w);
    alpha.push_back(q.dot(w));
    // Full reorthogonalization, applied twice for stability.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd coeffs = basis.leftCols(used).transpose() * w;
      w.noalias() -= basis.leftCols(used) * coeffs;
    }
    const double b = w.norm();
    if (j + 1 == steps) {
      beta.push_back(b);
      break;
    }
    if (b < 1e-12) {  // invariant subspace reached
      beta.push_back(0.0);
      break;
    }
    beta.push_back(b);
    q = w / b;
  }

  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(used, used);
  for (Eigen::Index j = 0; j < used; ++j) {
    tri(j, j) = alpha[static_cast<std::size_t>(j)];
    if (j + 1 < used) {
      tri(j, j + 1) = tri(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(tri);
  require(solver.info() == Eigen::Success, ErrorCode::kNumeric, "tridiagonal eigensolver failed");

  const double last_beta = beta.back();
  Spectrum s;
  s.method = SpectrumMethod::kLanczosTruncated;
  s.dimension = a.n_rows;
  for (Eigen::Index i = 0; i < used; ++i) {
    const double theta = solver.eigenvalues()(i);
    const double residual = std::abs(last_beta * solver.eigenvectors()(used - 1, i));
    if (residual <= options.tol * std::max(1.0, std::abs(theta))) s.eigenvalues.push_back(theta);
  }
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), std::greater<>());
  s.truncation_count = s.eigenvalues.size();
  if (s.truncation_count == a.n_rows) s.method = SpectrumMethod::kDense;
  return s;
}

Spectrum compute_spectrum(const SparseMatrix& a, SpectrumMode mode,
                          const LanczosOptions& options) {
  require(a.n_rows == a.n_cols, ErrorCode::kSymmetry, "spectrum of a non-square matrix");
  require(a.is_symmetric(kSymmetryTol), ErrorCode::kSymmetry,
          "matrix is not symmetric within 1e-12");
  require(a.n_rows > 0, ErrorCode::kEmptyGraph, "spectrum of an empty matrix");
  switch (mode) {
    case SpectrumMode::kDense:
      return dense_spectrum(a);
    case SpectrumMode::kAuto:
      return a.n_rows <= kAutoDenseLimit ? dense_spectrum(a) : lanczos_spectrum(a, options);
    case SpectrumMode::kLanczos:
      return lanczos_spectrum(a, options);
  }
  return dense_spectrum(a);
}

}  // namespace adagpr

// SPDX-License-Identifier: Apache-2.0

#include "adagpr/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "adagpr/error.hpp"

namespace adagpr::ad {

const Matrix& Var::value() const {
  require(tape_ != nullptr, ErrorCode::kContract, "use of an unbound Var");
  return tape_->value(id_);
}

bool Var::requires_grad() const {
  require(tape_ != nullptr, ErrorCode::kContract, "use of an unbound Var");
  return tape_->requires_grad(id_);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, true, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, bool requires_grad, BackwardFn backward) {
  require(!backward_done_, ErrorCode::kContract, "recording on a tape after backward()");
  nodes_.push_back(Node{std::move(value), {}, requires_grad, false,
                        requires_grad ? std::move(backward) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

Matrix Tape::grad(Var v) const {
  const Node& node = nodes_.at(v.id());
  if (node.grad.empty() && !node.value.empty()) {
    return Matrix(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) { accumulate_scaled(id, 1.0, g); }

void Tape::accumulate_scaled(std::size_t id, double alpha, const Matrix& g) {
  Node& node = nodes_.at(id);
  if (!node.requires_grad) return;
  if (node.grad.empty()) {
    node.grad = alpha == 1.0 ? g : scaled(g, alpha);
    require(node.grad.rows() == node.value.rows() && node.grad.cols() == node.value.cols(),
            ErrorCode::kInvariant, "gradient shape differs from value shape");
    return;
  }
  axpy(alpha, g, node.grad);
}

GradientSet Tape::backward(Var loss) {
  require(loss.tape() == this, ErrorCode::kContract, "loss belongs to another tape");
  require(!backward_done_, ErrorCode::kContract, "backward() called twice on the same tape");
  const Matrix& root = nodes_.at(loss.id()).value;
  require(root.rows() == 1 && root.cols() == 1, ErrorCode::kContract,
          "backward() needs a scalar root, got " + std::to_string(root.rows()) + "x" +
              std::to_string(root.cols()));
  backward_done_ = true;

  GradientSet grads;
  if (!nodes_[loss.id()].requires_grad) return grads;
  nodes_[loss.id()].grad = Matrix(1, 1, 1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.is_leaf) {
      grads.emplace(i, node.grad);
    } else if (node.backward) {
      node.backward(*this, i);
    }
  }
  return grads;
}

namespace {

Tape& same_tape(Var a, Var b) {
  require(a.tape() != nullptr && a.tape() == b.tape(), ErrorCode::kContract,
          "operands live on different tapes");
  return *a.tape();
}

Tape& tape_of(Var a) {
  require(a.tape() != nullptr, ErrorCode::kContract, "use of an unbound Var");
  return *a.tape();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::kDimension, std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
                                    "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(adagpr::matmul(a.value(), b.value()), a.requires_grad() || b.requires_grad(),
                  [ia, ib](Tape& tape, std::size_t self) {
                    const Matrix& g = tape.upstream(self);
                    if (tape.requires_grad(ia)) tape.accumulate(ia, matmul_nt(g, tape.value(ib)));
                    if (tape.requires_grad(ib)) tape.accumulate(ib, matmul_tn(tape.value(ia), g));
                  });
}

Var spmm_const(const SparseMatrix& a, Var x) {
  Tape& t = tape_of(x);
  const std::size_t ix = x.id();
  const SparseMatrix* ap = &a;
  return t.record(spmm(a, x.value()), x.requires_grad(), [ap, ix](Tape& tape, std::size_t self) {
    tape.accumulate(ix, spmm_transposed(*ap, tape.upstream(self)));
  });
}

Var add(Var a, Var b) { return affine_combine(1.0, a, 1.0, b); }

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  return t.record(scaled(a.value(), factor), a.requires_grad(),
                  [ia, factor](Tape& tape, std::size_t self) {
                    tape.accumulate_scaled(ia, factor, tape.upstream(self));
                  });
}

Var affine_combine(double c1, Var a, double c2, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "affine_combine");
  Matrix out = scaled(a.value(), c1);
  axpy(c2, b.value(), out);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(std::move(out), a.requires_grad() || b.requires_grad(),
                  [ia, ib, c1, c2](Tape& tape, std::size_t self) {
                    const Matrix& g = tape.upstream(self);
                    tape.accumulate_scaled(ia, c1, g);
                    tape.accumulate_scaled(ib, c2, g);
                  });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t ia = a.id();
  return t.record(std::move(out), a.requires_grad(), [ia](Tape& tape, std::size_t self) {
    Matrix g = tape.upstream(self);
    auto in = tape.value(ia).data();
    auto gs = g.data();
    for (std::size_t i = 0; i < gs.size(); ++i)
      if (!(in[i] > 0.0)) gs[i] = 0.0;
    tape.accumulate(ia, g);
  });
}

Var dropout(Var a, double rate, bool train, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, ErrorCode::kParameter,
          "dropout rate must lie in [0, 1), got " + std::to_string(rate));
  if (!train || rate == 0.0) return a;
  Tape& t = tape_of(a);
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  for (double& m : mask.data()) m = rng.uniform() >= rate ? keep_scale : 0.0;
  Matrix out = a.value();
  auto os = out.data();
  auto ms = mask.data();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] *= ms[i];
  const std::size_t ia = a.id();
  return t.record(std::move(out), a.requires_grad(),
                  [ia, mask = std::move(mask)](Tape& tape, std::size_t self) {
                    Matrix g = tape.upstream(self);
                    auto gs = g.data();
                    auto ms = mask.data();
                    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] *= ms[i];
                    tape.accumulate(ia, g);
                  });
}

Var log_softmax_rows(Var a) {
  Tape& t = tape_of(a);
  const Matrix& in = a.value();
  Matrix out(in.rows(), in.cols());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    const auto row = in.row(r);
    const double top = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - top);
    const double log_norm = top + std::log(total);
    auto dst = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) dst[j] = row[j] - log_norm;
  }
  const std::size_t ia = a.id();
  return t.record(out, a.requires_grad(), [ia](Tape& tape, std::size_t self) {
    // d/dx_j = g_j - softmax_j * Σ_i g_i
    const Matrix& g = tape.upstream(self);
    const Matrix& lp = tape.value(self);
    Matrix dx(g.rows(), g.cols());
    for (std::size_t r = 0; r < g.rows(); ++r) {
      const auto gr = g.row(r);
      double gsum = 0.0;
      for (double v : gr) gsum += v;
      const auto lr = lp.row(r);
      auto dr = dx.row(r);
      for (std::size_t j = 0; j < gr.size(); ++j) dr[j] = gr[j] - std::exp(lr[j]) * gsum;
    }
    tape.accumulate(ia, dx);
  });
}

Var identity_mix(Var h, Var w, double beta) {
  Tape& t = same_tape(h, w);
  const Matrix& hv = h.value();
  const Matrix& wv = w.value();
  if (hv.cols() != wv.rows()) {
    fail(ErrorCode::kDimension, "identity_mix: H has " + std::to_string(hv.cols()) +
                                    " columns but W has " + std::to_string(wv.rows()) + " rows");
  }
  Matrix out = adagpr::matmul(hv, wv);
  for (double& v : out.data()) v *= beta;
  const std::size_t shared = std::min(hv.cols(), wv.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto dst = out.row(r);
    const auto src = hv.row(r);
    for (std::size_t j = 0; j < shared; ++j) dst[j] += (1.0 - beta) * src[j];
  }
  const std::size_t ih = h.id();
  const std::size_t iw = w.id();
  return t.record(std::move(out), h.requires_grad() || w.requires_grad(),
                  [ih, iw, beta, shared](Tape& tape, std::size_t self) {
                    const Matrix& g = tape.upstream(self);
                    if (tape.requires_grad(ih)) {
                      Matrix dh = matmul_nt(g, tape.value(iw));
                      for (double& v : dh.data()) v *= beta;
                      for (std::size_t r = 0; r < dh.rows(); ++r) {
                        auto dst = dh.row(r);
                        const auto src = g.row(r);
                        for (std::size_t j = 0; j < shared; ++j) dst[j] += (1.0 - beta) * src[j];
                      }
                      tape.accumulate(ih, dh);
                    }
                    if (tape.requires_grad(iw)) {
                      tape.accumulate_scaled(iw, beta, matmul_tn(tape.value(ih), g));
                    }
                  });
}

Var nll_loss_masked(Var log_probs, std::span<const int> labels,
                    std::span<const std::size_t> mask) {
  Tape& t = tape_of(log_probs);
  const Matrix& lp = log_probs.value();
  require(!mask.empty(), ErrorCode::kDegenerateLoss, "loss over an empty node mask");
  require(labels.size() == lp.rows(), ErrorCode::kDimension, "labels length != rows");
  double total = 0.0;
  for (std::size_t i : mask) {
    require(i < lp.rows(), ErrorCode::kDimension, "mask index out of range");
    const int y = labels[i];
    require(y >= 0 && static_cast<std::size_t>(y) < lp.cols(), ErrorCode::kDimension,
            "label out of range for masked node " + std::to_string(i));
    total -= lp(i, static_cast<std::size_t>(y));
  }
  const double count = static_cast<double>(mask.size());
  const std::size_t ilp = log_probs.id();
  std::vector<std::size_t> rows(mask.begin(), mask.end());
  std::vector<int> ys;
  ys.reserve(rows.size());
  for (std::size_t i : rows) ys.push_back(labels[i]);
  return t.record(Matrix(1, 1, total / count), log_probs.requires_grad(),
                  [ilp, rows = std::move(rows), ys = std::move(ys), count](Tape& tape,
                                                                         std::size_t self) {
                    const double g = tape.upstream(self)(0, 0);
                    const Matrix& lpv = tape.value(ilp);
                    Matrix d(lpv.rows(), lpv.cols());
                    for (std::size_t n = 0; n < rows.size(); ++n) {
                      d(rows[n], static_cast<std::size_t>(ys[n])) -= g / count;
                    }
                    tape.accumulate(ilp, d);
                  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const std::size_t ia = a.id();
  return t.record(Matrix(1, 1, total), a.requires_grad(), [ia](Tape& tape, std::size_t self) {
    const Matrix& in = tape.value(ia);
    tape.accumulate(ia, Matrix(in.rows(), in.cols(), tape.upstream(self)(0, 0)));
  });
}

Var gpr(const SparseMatrix& a, Var mu, Var x) {
  Tape& t = same_tape(mu, x);
  const Matrix& mv = mu.value();
  require(mv.rows() == 1 && mv.cols() >= 1, ErrorCode::kInvalidOrder,
          "gpr coefficients must be a non-empty 1xK row");
  require(a.n_cols == x.rows(), ErrorCode::kDimension, "gpr: sparse/dense shape mismatch");
  const std::size_t order = mv.cols();
  const auto weights = mv.row(0);

  // Powers beyond the last nonzero coefficient only matter for d/dmu.
  std::size_t needed = 0;
  for (std::size_t k = 0; k < order; ++k)
    if (weights[k] != 0.0) needed = k + 1;
  if (mu.requires_grad()) needed = order;
  std::vector<Matrix> powers = propagate_powers(a, x.value(), std::max<std::size_t>(needed, 1));
  Matrix out = needed == 0 ? Matrix(x.rows(), x.cols()) : weighted_sum(weights.first(needed), powers);

  const std::size_t imu = mu.id();
  const std::size_t ix = x.id();
  const SparseMatrix* ap = &a;
  return t.record(
      std::move(out), mu.requires_grad() || x.requires_grad(),
      [ap, imu, ix, powers = std::move(powers)](Tape& tape, std::size_t self) {
        const Matrix& g = tape.upstream(self);
        const auto coeffs = tape.value(imu).row(0);
        if (tape.requires_grad(imu)) {
          Matrix dmu(1, coeffs.size());
          for (std::size_t k = 0; k < coeffs.size(); ++k) dmu(0, k) = frobenius_dot(powers[k], g);
          tape.accumulate(imu, dmu);
        }
        if (tape.requires_grad(ix)) {
          // d/dx = Σ_k mu_k (a^T)^k g
          std::size_t last = 0;
          for (std::size_t k = 0; k < coeffs.size(); ++k)
            if (coeffs[k] != 0.0) last = k + 1;
          if (last == 0) return;
          std::vector<Matrix> back;
          back.reserve(last);
          back.push_back(g);
          for (std::size_t k = 1; k < last; ++k) back.push_back(spmm_transposed(*ap, back.back()));
          tape.accumulate(ix, weighted_sum(coeffs.first(last), back));
        }
      });
}

Var coeff_activation(Var v) {
  Tape& t = tape_of(v);
  const Matrix& logits = v.value();
  require(logits.rows() == 1 && logits.cols() >= 1, ErrorCode::kInvalidOrder,
          "coefficient logits must be a non-empty 1xK row");
  CoeffActivation act = adagpr::coeff_activation(logits.row(0));
  static std::atomic_flag warned = ATOMIC_FLAG_INIT;
  if (act.clamped && !warned.test_and_set()) {
    std::clog << "warning: coefficient logit above " << kExpClamp
              << " clamped before exponentiation\n";
  }
  Matrix out = Matrix::row_vector(act.projection.output);
  const std::size_t iv = v.id();
  return t.record(std::move(out), v.requires_grad(),
                  [iv, act = std::move(act)](Tape& tape, std::size_t self) {
                    const auto grad = coeff_activation_backward(act, tape.value(iv).row(0),
                                                                tape.upstream(self).row(0));
                    tape.accumulate(iv, Matrix::row_vector(grad));
                  });
}

}  // namespace adagpr::ad

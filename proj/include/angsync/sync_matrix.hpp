#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "angsync/core.hpp"

namespace angsync {

/// Sparse Hermitian matrix with exp(i delta_ij) at (i, j) and its conjugate
/// at (j, i) for every measured pair, plus a constant real diagonal.
///
/// Stored in CSR form with both triangles expanded so a matrix-vector
/// product is one pass over 2m entries. When at least a quarter of all
/// pairs are measured a dense copy is kept as well and products go through
/// a dense GEMV, which vectorizes far better. Immutable after construction.
class SyncMatrix {
 public:
  SyncMatrix() = default;

  SyncMatrix(const OffsetGraph& graph, double diagonal_shift)
      : n_(graph.n()), shift_(diagonal_shift), row_ptr_(graph.n() + 1, 0) {
    for (const auto& e : graph.edges()) {
      ++row_ptr_[e.i + 1];
      ++row_ptr_[e.j + 1];
    }
    for (std::size_t r = 0; r < n_; ++r) row_ptr_[r + 1] += row_ptr_[r];
    col_.resize(row_ptr_[n_]);
    re_.resize(row_ptr_[n_]);
    im_.resize(row_ptr_[n_]);
    std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    for (const auto& e : graph.edges()) {
      const double c = std::cos(e.delta), s = std::sin(e.delta);
      std::size_t k = fill[e.i]++;
      col_[k] = e.j;
      re_[k] = c;
      im_[k] = s;
      k = fill[e.j]++;
      col_[k] = e.i;
      re_[k] = c;
      im_[k] = -s;
    }
    // Sort each row by column so products are reduction-order deterministic
    // regardless of edge order in the graph.
    std::vector<std::size_t> perm;
    for (std::size_t r = 0; r < n_; ++r) {
      const auto b = row_ptr_[r], e = row_ptr_[r + 1];
      perm.resize(e - b);
      for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = b + k;
      std::sort(perm.begin(), perm.end(), [&](auto x, auto y) { return col_[x] < col_[y]; });
      std::vector<std::size_t> c2(perm.size());
      std::vector<double> r2(perm.size()), i2(perm.size());
      for (std::size_t k = 0; k < perm.size(); ++k) {
        c2[k] = col_[perm[k]];
        r2[k] = re_[perm[k]];
        i2[k] = im_[perm[k]];
      }
      std::copy(c2.begin(), c2.end(), col_.begin() + static_cast<std::ptrdiff_t>(b));
      std::copy(r2.begin(), r2.end(), re_.begin() + static_cast<std::ptrdiff_t>(b));
      std::copy(i2.begin(), i2.end(), im_.begin() + static_cast<std::ptrdiff_t>(b));
    }
    if (n_ > 0 && n_ <= kDenseProductLimit && 4 * col_.size() >= n_ * n_) dense_ = to_dense();
  }

  static constexpr std::size_t kDenseProductLimit = 4096;

  /// True when products use the dense copy.
  bool dense_products() const noexcept { return dense_.size() > 0; }

  std::size_t n() const noexcept { return n_; }
  double diagonal_shift() const noexcept { return shift_; }
  /// Stored off-diagonal nonzeros (2m).
  std::size_t offdiagonal_nonzeros() const noexcept { return col_.size(); }

  /// y = H x.
  void multiply(const ComplexVector& x, ComplexVector& y) const {
    if (dense_products()) {
      y.noalias() = dense_ * x;
      return;
    }
    y.resize(static_cast<Eigen::Index>(n_));
    const Complex* xs = x.data();
    for (std::size_t r = 0; r < n_; ++r) {
      double acc_re = shift_ * xs[r].real();
      double acc_im = shift_ * xs[r].imag();
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const Complex xv = xs[col_[k]];
        acc_re += re_[k] * xv.real() - im_[k] * xv.imag();
        acc_im += re_[k] * xv.imag() + im_[k] * xv.real();
      }
      y[static_cast<Eigen::Index>(r)] = Complex(acc_re, acc_im);
    }
  }

  ComplexVector operator*(const ComplexVector& x) const {
    ComplexVector y;
    multiply(x, y);
    return y;
  }

  /// Y = H X for a block of column vectors.
  Eigen::MatrixXcd operator*(const Eigen::MatrixXcd& X) const {
    if (dense_products()) return dense_ * X;
    Eigen::MatrixXcd Y(X.rows(), X.cols());
    const auto cols = X.cols();
    for (std::size_t r = 0; r < n_; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      for (Eigen::Index c = 0; c < cols; ++c) Y(ri, c) = shift_ * X(ri, c);
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const Complex h(re_[k], im_[k]);
        const auto ci = static_cast<Eigen::Index>(col_[k]);
        for (Eigen::Index c = 0; c < cols; ++c) {
          const Complex xv = X(ci, c);
          Y(ri, c) += Complex(h.real() * xv.real() - h.imag() * xv.imag(),
                              h.real() * xv.imag() + h.imag() * xv.real());
        }
      }
    }
    return Y;
  }

  /// Maximum absolute row sum ||H||_inf; bounds every eigenvalue's modulus.
  double row_abs_sum_bound() const {
    double best = 0.0;
    for (std::size_t r = 0; r < n_; ++r) {
      best = std::max(best, static_cast<double>(row_ptr_[r + 1] - row_ptr_[r]) + std::abs(shift_));
    }
    return best;
  }

  bool is_zero() const noexcept { return col_.empty() && shift_ == 0.0; }

  Complex at(std::size_t r, std::size_t c) const {
    if (r == c) return {shift_, 0.0};
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_[k] == c) return {re_[k], im_[k]};
    }
    return {0.0, 0.0};
  }

  Eigen::MatrixXcd to_dense() const {
    const auto N = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t r = 0; r < n_; ++r) {
      d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) = shift_;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_[k])) = Complex(re_[k], im_[k]);
      }
    }
    return d;
  }

  /// Row r as (column, value) pairs, off-diagonal only.
  template <typename Fn>
  void for_each_in_row(std::size_t r, Fn&& fn) const {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) fn(col_[k], Complex(re_[k], im_[k]));
  }

  std::size_t row_nonzeros(std::size_t r) const { return row_ptr_[r + 1] - row_ptr_[r]; }

 private:
  std::size_t n_ = 0;
  double shift_ = 0.0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_;
  std::vector<double> re_;
  std::vector<double> im_;
  Eigen::MatrixXcd dense_;
};

}  // namespace angsync

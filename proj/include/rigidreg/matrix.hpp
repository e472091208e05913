/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace rigidreg {

/// Dense row-major matrix of doubles. Minimal surface: what the feature
/// network, soft-correspondence and loss code actually need.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) { return d_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return d_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<double> row(int r) { return {d_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const { return {d_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  std::size_t size() const { return d_.size(); }

  void set_zero() { d_.assign(d_.size(), 0.0); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> d_;
};

/// N x K x C tensor stored flat, row-major in (point, neighbor, channel).
struct Tensor3 {
  Tensor3() = default;
  Tensor3(int n, int k, int c) : n(n), k(k), c(c), d(static_cast<std::size_t>(n) * k * c, 0.0) {}

  double& at(int i, int j, int ch) { return d[(static_cast<std::size_t>(i) * k + j) * c + ch]; }
  double at(int i, int j, int ch) const { return d[(static_cast<std::size_t>(i) * k + j) * c + ch]; }

  std::span<const double> slot(int i, int j) const {
    return {d.data() + (static_cast<std::size_t>(i) * k + j) * c, static_cast<std::size_t>(c)};
  }

  int n = 0, k = 0, c = 0;
  std::vector<double> d;
};

/// C = A * B^T. A is m x k, B is n x k, C becomes m x n.
/// The B-transposed form is the one every hot path here needs (weights are
/// stored one row per output channel).
inline void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols() == b.cols());
  c = Matrix(a.rows(), b.rows());
  const int k = a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.data() + static_cast<std::size_t>(i) * k;
    double* ci = c.data() + static_cast<std::size_t>(i) * b.rows();
    for (int j = 0; j < b.rows(); ++j) {
      const double* bj = b.data() + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += ai[t] * bj[t];
      ci[j] = acc;
    }
  }
}

/// C = A * B. A is m x k, B is k x n.
inline void matmul(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols() == b.rows());
  c = Matrix(a.rows(), b.cols());
  const int n = b.cols();
  for (int i = 0; i < a.rows(); ++i) {
    double* ci = c.data() + static_cast<std::size_t>(i) * n;
    for (int t = 0; t < a.cols(); ++t) {
      const double av = a(i, t);
      if (av == 0.0) continue;
      const double* bt = b.data() + static_cast<std::size_t>(t) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
  }
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace rigidreg

/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/softcorr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rigidreg {

namespace {

constexpr double kZeroNorm = 1e-12;

std::vector<double> row_norms(const Matrix& m) {
  std::vector<double> norms(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += v * v;
    norms[i] = std::sqrt(s);
  }
  return norms;
}

}  // namespace

Matrix soft_correspondence(const Matrix& hx, const Matrix& hy) {
  if (hx.cols() != hy.cols())
    throw std::invalid_argument("soft_correspondence: embedding widths differ");

  const auto nx = row_norms(hx);
  const auto ny = row_norms(hy);
  Matrix p;
  matmul_nt(hx, hy, p);
  for (int i = 0; i < p.rows(); ++i) {
    for (int j = 0; j < p.cols(); ++j) {
      if (nx[i] < kZeroNorm || ny[j] < kZeroNorm)
        p(i, j) = 0.0;
      else
        p(i, j) /= nx[i] * ny[j];
    }
  }
  return p;
}

std::vector<int> hard_map(const Matrix& p) {
  std::vector<int> pi(p.rows(), 0);
  for (int i = 0; i < p.rows(); ++i) {
    int best = 0;
    double best_v = p(i, 0);
    for (int j = 1; j < p.cols(); ++j)
      if (p(i, j) > best_v) {
        best_v = p(i, j);
        best = j;
      }
    pi[i] = best;
  }
  return pi;
}

ConfidenceDistribution confidence(const Matrix& p) {
  ConfidenceDistribution dist;
  dist.p_m.resize(p.rows());
  double total = 0.0;
  for (int i = 0; i < p.rows(); ++i) {
    double mx = p(i, 0);
    for (int j = 1; j < p.cols(); ++j) mx = std::max(mx, p(i, j));
    dist.p_m[i] = std::max(0.0, mx);
    total += dist.p_m[i];
  }
  dist.s.resize(p.rows());
  if (total <= 0.0) {
    std::fill(dist.s.begin(), dist.s.end(), 1.0 / p.rows());
  } else {
    for (int i = 0; i < p.rows(); ++i) dist.s[i] = dist.p_m[i] / total;
  }
  return dist;
}

std::vector<int> sample_bag(const ConfidenceDistribution& dist, int size, Rng& rng) {
  if (size < 1) throw std::invalid_argument("sample_bag: size must be >= 1");
  std::vector<double> cdf(dist.s.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.s.size(); ++i) {
    acc += dist.s[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  std::vector<int> bag(size);
  for (int d = 0; d < size; ++d) {
    const double u = rng.uniform();
    bag[d] = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  }
  return bag;
}

std::vector<int> bag_weights(std::span<const int> bag, int n_source) {
  std::vector<int> w(n_source, 0);
  for (int idx : bag) {
    if (idx < 0 || idx >= n_source)
      throw std::invalid_argument("bag_weights: index out of range");
    ++w[idx];
  }
  return w;
}

void cosine_backward(const Matrix& hx, const Matrix& hy, const Matrix& p,
                     const Matrix& d_p, Matrix& d_hx, Matrix& d_hy) {
  const auto nx = row_norms(hx);
  const auto ny = row_norms(hy);
  const int w = hx.cols();

  d_hx = Matrix(hx.rows(), w);
  d_hy = Matrix(hy.rows(), w);

  // d/da_i of sum_j g_ij cos(a_i, b_j)
  //   = sum_j g_ij [ b_j / (|a_i||b_j|) - P_ij a_i / |a_i|^2 ].
  for (int i = 0; i < hx.rows(); ++i) {
    if (nx[i] < kZeroNorm) continue;
    auto dxi = d_hx.row(i);
    double coupling = 0.0;
    for (int j = 0; j < hy.rows(); ++j) {
      const double g = d_p(i, j);
      if (g == 0.0 || ny[j] < kZeroNorm) continue;
      const double scale = g / (nx[i] * ny[j]);
      axpy(scale, hy.row(j), dxi);
      coupling += g * p(i, j);
    }
    axpy(-coupling / (nx[i] * nx[i]), hx.row(i), dxi);
  }

  for (int j = 0; j < hy.rows(); ++j) {
    if (ny[j] < kZeroNorm) continue;
    auto dyj = d_hy.row(j);
    double coupling = 0.0;
    for (int i = 0; i < hx.rows(); ++i) {
      const double g = d_p(i, j);
      if (g == 0.0 || nx[i] < kZeroNorm) continue;
      const double scale = g / (nx[i] * ny[j]);
      axpy(scale, hx.row(i), dyj);
      coupling += g * p(i, j);
    }
    axpy(-coupling / (ny[j] * ny[j]), hy.row(j), dyj);
  }
}

void dump_correspondence_csv(const Matrix& p, const ConfidenceDistribution& dist,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "# soft correspondence matrix, " << p.rows() << " x " << p.cols() << "\n";
  for (int i = 0; i < p.rows(); ++i) {
    for (int j = 0; j < p.cols(); ++j) out << (j ? "," : "") << p(i, j);
    out << "\n";
  }
  out << "# sampling pmf\n";
  for (std::size_t i = 0; i < dist.s.size(); ++i) out << (i ? "," : "") << dist.s[i];
  out << "\n";
}

}  // namespace rigidreg

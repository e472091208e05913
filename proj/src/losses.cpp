/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/losses.hpp"

#include <stdexcept>

namespace rigidreg {

AdjacencySets build_adjacency(const PointCloud& y, int k_loss) {
  const int n = static_cast<int>(y.size());
  if (k_loss < 1 || k_loss >= n) throw std::invalid_argument("build_adjacency: k_loss out of range");

  const NeighborhoodIndex idx = knn(y, k_loss, /*include_self=*/false);
  AdjacencySets adj;
  adj.k_loss = k_loss;
  adj.neighbors.resize(n);
  adj.is_neighbor.assign(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    const auto row = idx.row(i);
    adj.neighbors[i].assign(row.begin(), row.end());
    for (int j : row) adj.is_neighbor[static_cast<std::size_t>(i) * n + j] = 1;
  }
  return adj;
}

double hard_loss(const Matrix& p) {
  if (p.rows() != p.cols()) throw std::invalid_argument("hard_loss: P must be square");
  double sum = 0.0;
  for (int i = 0; i < p.rows(); ++i) sum += 1.0 - p(i, i);
  return sum / p.rows();
}

namespace {

void check_margins(double m_p, double m_n) {
  if (!(0.0 <= m_n && m_n < m_p && m_p <= 1.0))
    throw std::invalid_argument("contrastive margins must satisfy 0 <= m_n < m_p <= 1");
}

void check_shapes(const Matrix& p, const AdjacencySets& adj, std::span<const int> w) {
  if (p.rows() != adj.n() || p.cols() != adj.n() || static_cast<int>(w.size()) != adj.n())
    throw std::invalid_argument("contrastive_losses: P, adjacency and weights disagree on N");
}

long total_bag(std::span<const int> w) {
  long q = 0;
  for (int v : w) q += v;
  return q;
}

}  // namespace

std::pair<double, double> contrastive_losses(const Matrix& p, const AdjacencySets& adj,
                                             std::span<const int> w, double m_p, double m_n) {
  check_margins(m_p, m_n);
  check_shapes(p, adj, w);

  const int n = adj.n();
  const long q = total_bag(w);
  double lp = 0.0, ln = 0.0;
  for (int i = 0; i < n; ++i) {
    if (w[i] == 0) continue;
    double lp_i = 0.0, ln_i = 0.0;
    for (int j = 0; j < n; ++j) {
      if (adj.adjacent(i, j)) {
        const double gap = m_p - p(i, j);
        if (gap > 0.0) lp_i += gap;
      } else if (j != i) {
        const double over = p(i, j) - m_n;
        if (over > 0.0) ln_i += over;
      }
    }
    lp += w[i] * lp_i;
    ln += w[i] * ln_i;
  }
  const double denom_p = static_cast<double>(q) * adj.positive_count();
  const double denom_n = static_cast<double>(q) * adj.negative_count();
  return {denom_p > 0 ? lp / denom_p : 0.0, denom_n > 0 ? ln / denom_n : 0.0};
}

LossReport total_loss(const Matrix& p, const AdjacencySets& adj, std::span<const int> w,
                      double m_p, double m_n, Matrix* d_p) {
  check_margins(m_p, m_n);
  check_shapes(p, adj, w);

  LossReport r;
  r.l_h = hard_loss(p);
  std::tie(r.l_pq, r.l_nq) = contrastive_losses(p, adj, w, m_p, m_n);
  r.l_c = r.l_h + r.l_pq + r.l_nq;

  if (d_p) {
    const int n = adj.n();
    const long q = total_bag(w);
    const double gp = q > 0 ? 1.0 / (static_cast<double>(q) * adj.positive_count()) : 0.0;
    const double gn = q > 0 && adj.negative_count() > 0
                          ? 1.0 / (static_cast<double>(q) * adj.negative_count())
                          : 0.0;
    *d_p = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
      (*d_p)(i, i) = -1.0 / n;
      if (w[i] == 0) continue;
      for (int j = 0; j < n; ++j) {
        if (adj.adjacent(i, j)) {
          if (p(i, j) < m_p) (*d_p)(i, j) += -static_cast<double>(w[i]) * gp;
        } else if (j != i) {
          if (p(i, j) > m_n) (*d_p)(i, j) += static_cast<double>(w[i]) * gn;
        }
      }
    }
  }
  return r;
}

std::uint64_t loss_activity_hash(const Matrix& p, const AdjacencySets& adj,
                                 std::span<const int> w, double m_p, double m_n) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  const int n = adj.n();
  for (int i = 0; i < n; ++i) {
    if (w[i] == 0) continue;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool active = adj.adjacent(i, j) ? p(i, j) < m_p : p(i, j) > m_n;
      mix((static_cast<std::uint64_t>(i) << 32) ^ (static_cast<std::uint64_t>(j) << 1) ^
          (active ? 1u : 0u));
    }
  }
  return h;
}

}  // namespace rigidreg

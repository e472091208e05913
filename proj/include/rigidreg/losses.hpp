/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rigidreg/geom.hpp"
#include "rigidreg/matrix.hpp"

namespace rigidreg {

/// Euclidean k-NN adjacency of the target cloud. A point is never its own
/// neighbor, and the diagonal belongs to neither the positive nor the
/// negative set (the diagonal is owned by the hard mapping loss).
struct AdjacencySets {
  int k_loss = 0;
  std::vector<std::vector<int>> neighbors;  // sorted index lists
  std::vector<char> is_neighbor;            // n*n membership bitmap

  int n() const { return static_cast<int>(neighbors.size()); }
  bool adjacent(int i, int j) const {
    return is_neighbor[static_cast<std::size_t>(i) * n() + j] != 0;
  }
  long positive_count() const { return static_cast<long>(n()) * k_loss; }
  long negative_count() const { return static_cast<long>(n()) * (n() - 1 - k_loss); }
};

AdjacencySets build_adjacency(const PointCloud& y, int k_loss);

/// (1/N) sum_i (1 - P_ii). Requires square P.
double hard_loss(const Matrix& p);

/// Weighted positive/negative hinge terms:
///   Lp_i = sum_{j in N_i} max(0, m_p - P_ij)
///   Ln_i = sum_{j not in N_i, j != i} max(0, P_ij - m_n)
///   L_pQ = sum_i w_i Lp_i / (|Q| * sum A),  L_nQ likewise over the complement.
/// Requires 0 <= m_n < m_p <= 1.
std::pair<double, double> contrastive_losses(const Matrix& p, const AdjacencySets& adj,
                                             std::span<const int> w, double m_p, double m_n);

struct LossReport {
  double l_h = 0.0;
  double l_pq = 0.0;
  double l_nq = 0.0;
  double l_c = 0.0;
};

/// Full objective L_C = L_h + L_pQ + L_nQ. When d_p is non-null it receives
/// the exact subgradient with the convention that a hinge sitting exactly at
/// its margin contributes zero.
LossReport total_loss(const Matrix& p, const AdjacencySets& adj, std::span<const int> w,
                      double m_p, double m_n, Matrix* d_p = nullptr);

/// FNV hash over the active hinge set; used by gradient checks to discard
/// finite-difference probes that cross a kink.
std::uint64_t loss_activity_hash(const Matrix& p, const AdjacencySets& adj,
                                 std::span<const int> w, double m_p, double m_n);

}  // namespace rigidreg

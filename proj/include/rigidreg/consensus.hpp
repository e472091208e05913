/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rigidreg/geom.hpp"
#include "rigidreg/matrix.hpp"
#include "rigidreg/rng.hpp"

namespace rigidreg {

struct KabschResult {
  RigidTransform transform;
  /// Set when the centered source is rank-deficient below a plane
  /// (collinear or coincident); the transform is still the SVD solution.
  bool degenerate = false;
};

/// Closed-form least-squares rigid alignment of matched pairs
/// (src[i] -> dst[i]): centroids removed, cross-covariance SVD, determinant
/// corrected so the rotation is always proper. Throws std::invalid_argument
/// on a length mismatch or fewer than 3 pairs.
KabschResult kabsch(std::span<const Vec3> src, std::span<const Vec3> dst);

struct ExperimentResult {
  RigidTransform transform;
  double score = 0.0;            // chamfer of the transformed source vs target
  std::vector<int> group;        // source indices fed to the solver
  bool degenerate = false;
};

struct ConsensusResult {
  RigidTransform transform;
  std::vector<ExperimentResult> experiments;
};

/// Confidence-based consensus: draws k_groups groups of r = |bag|/k_groups
/// indices uniformly (with replacement) from the bag, solves Kabsch per
/// group against the hard map of P, scores each candidate by the chamfer
/// distance of the fully transformed source against the target, and keeps
/// the lowest score. Degenerate groups score +inf instead of aborting.
/// The group solves are independent and run across `threads` workers; the
/// winner is chosen by (score, experiment index) so the result does not
/// depend on the thread count. Requires r >= 3.
ConsensusResult consensus_register(const PointCloud& x, const PointCloud& y, const Matrix& p,
                                   std::span<const int> bag, int k_groups, Rng& rng,
                                   int threads = 1);

/// Ablation registrar: one Kabsch solve over every pair (x_i, y_pi(i)).
RigidTransform full_register(const PointCloud& x, const PointCloud& y, const Matrix& p);

/// Ablation registrar: one Kabsch solve over the k_top source points with
/// the highest confidence (ties to the lower index). Requires k_top >= 3.
RigidTransform topk_register(const PointCloud& x, const PointCloud& y, const Matrix& p,
                             int k_top);

/// Diagnostics dump of every experiment, as JSON.
void dump_experiments_json(const std::vector<ExperimentResult>& experiments,
                           const std::string& path);

}  // namespace rigidreg

/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <vector>

#include "rigidreg/geom.hpp"

namespace rigidreg {

/// Exact kd-tree over 3D points. Results are identical to an exhaustive scan
/// ordered by (squared distance, point index): equal distances resolve to the
/// lower index, and pruning never discards a potential tie.
class KdTree3 {
 public:
  explicit KdTree3(std::span<const Vec3> pts);

  /// Indices of the k nearest points to q, sorted by (distance, index).
  /// A point index equal to `exclude` is skipped. k must not exceed the
  /// number of eligible points.
  void knn(const Vec3& q, int k, std::vector<int>& out, int exclude = -1) const;

  /// Index of the nearest point; squared distance optionally returned.
  int nearest(const Vec3& q, double* sq_dist = nullptr, int exclude = -1) const;

  std::size_t size() const { return pts_.size(); }

 private:
  struct Node {
    int axis = -1;      // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // index range for leaves
  };

  int build(int begin, int end);

  std::vector<Vec3> pts_;
  std::vector<int> perm_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;

  struct Heap;
  void search(int node, const Vec3& q, int exclude, Heap& heap) const;
};

}  // namespace rigidreg

/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rigidreg {

namespace {

double coord(const Vec3& p, int axis) {
  switch (axis) {
    case 0: return p.x;
    case 1: return p.y;
    default: return p.z;
  }
}

}  // namespace

// Fixed-capacity max-heap keyed lexicographically by (squared distance,
// index), so the retained set matches a brute-force sort exactly.
struct KdTree3::Heap {
  struct Entry {
    double d2;
    int idx;
    bool operator<(const Entry& o) const {
      return d2 < o.d2 || (d2 == o.d2 && idx < o.idx);
    }
  };

  explicit Heap(int k) : capacity(k) { entries.reserve(k); }

  bool full() const { return static_cast<int>(entries.size()) == capacity; }
  const Entry& worst() const { return entries.front(); }

  void offer(double d2, int idx) {
    Entry e{d2, idx};
    if (!full()) {
      entries.push_back(e);
      std::push_heap(entries.begin(), entries.end());
    } else if (e < worst()) {
      std::pop_heap(entries.begin(), entries.end());
      entries.back() = e;
      std::push_heap(entries.begin(), entries.end());
    }
  }

  int capacity;
  std::vector<Entry> entries;
};

KdTree3::KdTree3(std::span<const Vec3> pts) : pts_(pts.begin(), pts.end()) {
  perm_.resize(pts_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = static_cast<int>(i);
  if (!pts_.empty()) root_ = build(0, static_cast<int>(pts_.size()));
}

int KdTree3::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  // Split on the axis with the largest extent.
  Vec3 lo = pts_[perm_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    const Vec3& p = pts_[perm_[i]];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3 ext = hi - lo;
  int axis = 0;
  if (ext.y > ext.x) axis = 1;
  if (coord(ext, 2) > coord(ext, axis)) axis = 2;

  const int mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](int a, int b) { return coord(pts_[a], axis) < coord(pts_[b], axis); });

  nodes_[id].axis = axis;
  nodes_[id].split = coord(pts_[perm_[mid]], axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree3::search(int node, const Vec3& q, int exclude, Heap& heap) const {
  const Node& nd = nodes_[node];
  if (nd.axis < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int idx = perm_[i];
      if (idx == exclude) continue;
      heap.offer(squared_distance(q, pts_[idx]), idx);
    }
    return;
  }

  const double delta = coord(q, nd.axis) - nd.split;
  const int near = delta < 0.0 ? nd.left : nd.right;
  const int far = delta < 0.0 ? nd.right : nd.left;
  search(near, q, exclude, heap);
  // Descend the far side unless its lower bound strictly beats every tie:
  // an equal-distance point with a lower index may still displace the worst.
  if (!heap.full() || delta * delta <= heap.worst().d2) search(far, q, exclude, heap);
}

void KdTree3::knn(const Vec3& q, int k, std::vector<int>& out, int exclude) const {
  const int eligible = static_cast<int>(pts_.size()) - (exclude >= 0 ? 1 : 0);
  if (k < 1 || k > eligible) throw std::invalid_argument("KdTree3::knn: k out of range");
  Heap heap(k);
  search(root_, q, exclude, heap);
  std::sort_heap(heap.entries.begin(), heap.entries.end());
  out.resize(k);
  for (int i = 0; i < k; ++i) out[i] = heap.entries[i].idx;
}

int KdTree3::nearest(const Vec3& q, double* sq_dist, int exclude) const {
  Heap heap(1);
  search(root_, q, exclude, heap);
  if (heap.entries.empty()) throw std::runtime_error("KdTree3::nearest: empty tree");
  if (sq_dist) *sq_dist = heap.entries[0].d2;
  return heap.entries[0].idx;
}

}  // namespace rigidreg

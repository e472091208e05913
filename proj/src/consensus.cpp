/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/consensus.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "rigidreg/parallel.hpp"
#include "rigidreg/softcorr.hpp"

namespace rigidreg {

KabschResult kabsch(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size()) throw std::invalid_argument("kabsch: length mismatch");
  if (src.size() < 3) throw std::invalid_argument("kabsch: at least 3 pairs required");

  const Vec3 cx = centroid(src);
  const Vec3 cy = centroid(dst);

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec3 a = src[i] - cx;
    const Vec3 b = dst[i] - cy;
    h(0, 0) += a.x * b.x; h(0, 1) += a.x * b.y; h(0, 2) += a.x * b.z;
    h(1, 0) += a.y * b.x; h(1, 1) += a.y * b.y; h(1, 2) += a.y * b.z;
    h(2, 0) += a.z * b.x; h(2, 1) += a.z * b.y; h(2, 2) += a.z * b.z;
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d rot = v * d * u.transpose();

  KabschResult result;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) result.transform.rotation.m[i][j] = rot(i, j);
  result.transform.translation = cy - result.transform.rotation * cx;

  // Below-plane rank (collinear or coincident source) leaves the rotation
  // underdetermined around the source axis.
  const auto& sv = svd.singularValues();
  result.degenerate = sv(1) <= 1e-12 * std::max(sv(0), 1e-300);
  return result;
}

namespace {

std::vector<Vec3> gather(const PointCloud& cloud, std::span<const int> idx) {
  std::vector<Vec3> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(cloud[i]);
  return out;
}

std::vector<Vec3> gather_mapped(const PointCloud& cloud, std::span<const int> idx,
                                std::span<const int> map) {
  std::vector<Vec3> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(cloud[map[i]]);
  return out;
}

}  // namespace

ConsensusResult consensus_register(const PointCloud& x, const PointCloud& y, const Matrix& p,
                                   std::span<const int> bag, int k_groups, Rng& rng,
                                   int threads) {
  if (k_groups < 1) throw std::invalid_argument("consensus_register: k_groups must be >= 1");
  const int r = static_cast<int>(bag.size()) / k_groups;
  if (r < 3)
    throw std::invalid_argument("consensus_register: group size |bag|/k_groups must be >= 3");

  const std::vector<int> pi = hard_map(p);

  // Draw the groups sequentially so the result is a pure function of the
  // rng state; only the solves run in parallel.
  std::vector<std::vector<int>> groups(k_groups);
  for (auto& g : groups) {
    g.resize(r);
    for (int& idx : g) idx = bag[rng.uniform_int(static_cast<int>(bag.size()))];
  }

  ConsensusResult result;
  result.experiments.resize(k_groups);
  parallel_for(k_groups, threads, [&](int e) {
    ExperimentResult& exp = result.experiments[e];
    exp.group = groups[e];
    const auto src = gather(x, exp.group);
    const auto dst = gather_mapped(y, exp.group, pi);
    const KabschResult kr = kabsch(src, dst);
    exp.transform = kr.transform;
    exp.degenerate = kr.degenerate;
    exp.score = kr.degenerate ? std::numeric_limits<double>::infinity()
                              : chamfer(apply_transform(x, kr.transform), y);
  });

  int best = 0;
  for (int e = 1; e < k_groups; ++e)
    if (result.experiments[e].score < result.experiments[best].score) best = e;
  result.transform = result.experiments[best].transform;
  return result;
}

RigidTransform full_register(const PointCloud& x, const PointCloud& y, const Matrix& p) {
  const std::vector<int> pi = hard_map(p);
  std::vector<int> all(x.size());
  std::iota(all.begin(), all.end(), 0);
  return kabsch(gather(x, all), gather_mapped(y, all, pi)).transform;
}

RigidTransform topk_register(const PointCloud& x, const PointCloud& y, const Matrix& p,
                             int k_top) {
  if (k_top < 3 || k_top > static_cast<int>(x.size()))
    throw std::invalid_argument("topk_register: k_top out of range");

  const ConfidenceDistribution dist = confidence(p);
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist.p_m[a] > dist.p_m[b]; });
  order.resize(k_top);

  const std::vector<int> pi = hard_map(p);
  return kabsch(gather(x, order), gather_mapped(y, order, pi)).transform;
}

void dump_experiments_json(const std::vector<ExperimentResult>& experiments,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "[\n";
  for (std::size_t e = 0; e < experiments.size(); ++e) {
    const auto& exp = experiments[e];
    out << "  {\"score\": " << (std::isfinite(exp.score) ? exp.score : -1.0)
        << ", \"degenerate\": " << (exp.degenerate ? "true" : "false") << ", \"rotation\": [";
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out << exp.transform.rotation.m[i][j] << (i == 2 && j == 2 ? "" : ", ");
    out << "], \"translation\": [" << exp.transform.translation.x << ", "
        << exp.transform.translation.y << ", " << exp.transform.translation.z << "], \"group\": [";
    for (std::size_t i = 0; i < exp.group.size(); ++i) out << (i ? ", " : "") << exp.group[i];
    out << "]}" << (e + 1 < experiments.size() ? "," : "") << "\n";
  }
  out << "]\n";
}

}  // namespace rigidreg

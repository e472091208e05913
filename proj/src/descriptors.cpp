/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/descriptors.hpp"

#include <cmath>

namespace rigidreg {

double angle_between(const Vec3& u, const Vec3& v) {
  constexpr double kDegenerate = 1e-12;
  if (u.norm() < kDegenerate || v.norm() < kDegenerate) return 0.0;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

DescriptorTensor ri_features(const PointCloud& cloud, int k) {
  DescriptorTensor out;
  out.nbr = knn(cloud, k, /*include_self=*/false);
  const int n = static_cast<int>(cloud.size());
  out.values = Tensor3(n, k, kRiChannels);

  const Vec3 origin = cloud.centroid();
  for (int pi = 0; pi < n; ++pi) {
    const Vec3& p = cloud[pi];
    const auto row = out.nbr.row(pi);

    Vec3 m;  // center of the neighborhood, p itself excluded
    for (int j = 0; j < k; ++j) m += cloud[row[j]];
    m = m * (1.0 / k);

    const Vec3 mp = p - m;
    const Vec3 pm = m - p;
    const Vec3 op = p - origin;
    const Vec3 om = m - origin;

    for (int j = 0; j < k; ++j) {
      const Vec3& x = cloud[row[j]];
      const Vec3 mx = x - m;
      const Vec3 px = x - p;
      const Vec3 ox = x - origin;
      out.values.at(pi, j, kAlphaXMP) = angle_between(mx, mp);
      out.values.at(pi, j, kAlphaXPM) = angle_between(px, pm);
      out.values.at(pi, j, kDistXM) = mx.norm();
      out.values.at(pi, j, kDistXP) = px.norm();
      out.values.at(pi, j, kAlphaXOP) = angle_between(ox, op);
      out.values.at(pi, j, kAlphaXOM) = angle_between(ox, om);
      out.values.at(pi, j, kDistXO) = ox.norm();
    }
  }
  return out;
}

DescriptorTensor cartesian_features(const PointCloud& cloud, int k) {
  DescriptorTensor out;
  out.nbr = knn(cloud, k, /*include_self=*/false);
  const int n = static_cast<int>(cloud.size());
  out.values = Tensor3(n, k, kCartesianChannels);

  for (int pi = 0; pi < n; ++pi) {
    const Vec3& p = cloud[pi];
    const auto row = out.nbr.row(pi);
    for (int j = 0; j < k; ++j) {
      const Vec3 d = cloud[row[j]] - p;
      out.values.at(pi, j, 0) = d.x;
      out.values.at(pi, j, 1) = d.y;
      out.values.at(pi, j, 2) = d.z;
      out.values.at(pi, j, 3) = p.x;
      out.values.at(pi, j, 4) = p.y;
      out.values.at(pi, j, 5) = p.z;
    }
  }
  return out;
}

}  // namespace rigidreg

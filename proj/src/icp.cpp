/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/icp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rigidreg/consensus.hpp"
#include "rigidreg/kdtree.hpp"

namespace rigidreg {

void IcpConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("IcpConfig: max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("IcpConfig: tol must be > 0");
}

IcpResult icp(const PointCloud& x, const PointCloud& y, const IcpConfig& cfg) {
  cfg.validate();
  const KdTree3 target(y.points());
  const int n = static_cast<int>(x.size());

  IcpResult result;
  result.transform = cfg.init;

  std::vector<Vec3> moved(x.points().begin(), x.points().end());
  for (int i = 0; i < n; ++i) moved[i] = cfg.init.apply(moved[i]);

  std::vector<Vec3> matched(n);
  double prev_mse = std::numeric_limits<double>::infinity();

  for (int it = 0; it < cfg.max_iters; ++it) {
    double mse = 0.0;
    for (int i = 0; i < n; ++i) {
      double d2;
      matched[i] = y[target.nearest(moved[i], &d2)];
      mse += d2;
    }
    mse /= n;
    result.iterations = it + 1;
    result.mse = mse;
    result.mse_trace.push_back(mse);
    if (prev_mse - mse <= cfg.tol) break;
    prev_mse = mse;

    const RigidTransform step = kabsch(moved, matched).transform;
    for (Vec3& p : moved) p = step.apply(p);
    result.transform = step.compose(result.transform);
  }
  return result;
}

}  // namespace rigidreg

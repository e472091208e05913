/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <vector>

#include "rigidreg/geom.hpp"

namespace rigidreg {

struct IcpConfig {
  int max_iters = 50;
  double tol = 1e-10;  // convergence threshold on the change in mean squared NN distance
  RigidTransform init = RigidTransform::identity();

  void validate() const;
};

struct IcpResult {
  RigidTransform transform;
  int iterations = 0;
  double mse = 0.0;               // final mean squared nearest-neighbor distance
  std::vector<double> mse_trace;  // one entry per iteration, non-increasing
};

/// Classic point-to-point ICP: alternate exact nearest-neighbor matching
/// into y with a Kabsch solve on the matched pairs, until the mean squared
/// error stops improving by more than tol or max_iters is reached.
/// Non-convergence is reported through the result, never as an error.
IcpResult icp(const PointCloud& x, const PointCloud& y, const IcpConfig& cfg);

}  // namespace rigidreg

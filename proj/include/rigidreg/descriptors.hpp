/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include "rigidreg/geom.hpp"
#include "rigidreg/matrix.hpp"

namespace rigidreg {

/// Channel order of the rotation-invariant descriptor.
enum RiChannel {
  kAlphaXMP = 0,  // angle at m between m->x and m->p
  kAlphaXPM = 1,  // angle at p between p->x and p->m
  kDistXM = 2,
  kDistXP = 3,
  kAlphaXOP = 4,  // angle at the cloud center O between O->x and O->p
  kAlphaXOM = 5,
  kDistXO = 6,
};

inline constexpr int kRiChannels = 7;
inline constexpr int kCartesianChannels = 6;

/// Per-point, per-neighbor feature tensor plus the neighborhood it was
/// built over.
struct DescriptorTensor {
  Tensor3 values;           // N x k x channels
  NeighborhoodIndex nbr;    // the k-NN rows used (self excluded)

  int channels() const { return values.c; }
};

/// Angle between u and v in [0, pi]; 0 when either vector has norm below
/// 1e-12 (degenerate convention). Computed as atan2(|u x v|, u . v), which
/// equals the arccos of the clamped normalized dot product but stays stable
/// near 0 and pi.
double angle_between(const Vec3& u, const Vec3& v);

/// Rotation-invariant features: for each source point p with neighborhood
/// N_p (k nearest, self excluded), m the center of N_p and O the cloud
/// center, emits for every x in N_p the channels
/// [a_xmp, a_xpm, d(x,m), d(x,p), a_xOp, a_xOm, d(x,O)].
/// Every channel is a distance or an angle, so the tensor is unchanged by
/// any rigid motion of the cloud.
DescriptorTensor ri_features(const PointCloud& cloud, int k);

/// Ablation input: raw edge features [x - p | p], 6 channels, same shape
/// contract. Not rotation invariant.
DescriptorTensor cartesian_features(const PointCloud& cloud, int k);

}  // namespace rigidreg

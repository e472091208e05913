/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rigidreg/rng.hpp"

namespace rigidreg {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
};

using Point3 = Vec3;

inline double squared_distance(const Vec3& a, const Vec3& b) {
  return (a - b).squared_norm();
}

/// 3x3 matrix, row-major.
struct Mat3 {
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  static Mat3 identity() { return {}; }
  static Mat3 zero() {
    Mat3 r;
    for (auto& row : r.m)
      for (auto& v : row) v = 0.0;
    return r;
  }

  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r = zero();
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) r.m[i][j] += m[i][k] * o.m[k][j];
    return r;
  }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }

  double trace() const { return m[0][0] + m[1][1] + m[2][2]; }

  double det() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
};

/// Proper rigid motion y = R x + t.
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// Composition: (*this) after other, i.e. apply(other.apply(p)).
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transposed();
    return {rt, (rt * translation) * -1.0};
  }

  /// R^T R = I and det(R) = +1, each within tol per entry.
  bool is_valid(double tol = 1e-9) const;
};

/// Ordered point list with its Euclidean center cached at construction.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points);

  std::size_t size() const { return pts_.size(); }
  const Vec3& operator[](std::size_t i) const { return pts_[i]; }
  std::span<const Vec3> points() const { return pts_; }
  const Vec3& centroid() const { return centroid_; }

 private:
  std::vector<Vec3> pts_;
  Vec3 centroid_;
};

/// Exact k-nearest-neighbor rows, each sorted by nondecreasing distance with
/// ties broken toward the lower point index.
struct NeighborhoodIndex {
  int k = 0;
  std::vector<int> flat;  // n rows of k indices

  int n() const { return k == 0 ? 0 : static_cast<int>(flat.size()) / k; }
  std::span<const int> row(int i) const {
    return {flat.data() + static_cast<std::size_t>(i) * k, static_cast<std::size_t>(k)};
  }
};

Vec3 centroid(std::span<const Vec3> pts);

/// k nearest neighbors of every point, against the cloud itself. The query
/// point is excluded unless include_self is set. Requires k < N (k <= N with
/// include_self); throws std::invalid_argument otherwise.
NeighborhoodIndex knn(const PointCloud& cloud, int k, bool include_self = false);

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

/// Proper rotation with angle <= max_angle_deg. At max_angle_deg == 180 the
/// draw is Haar-uniform over SO(3) (quaternion method); below that the axis
/// is uniform on the sphere and the angle uniform in [0, max].
Mat3 random_rotation(double max_angle_deg, Rng& rng);

/// Intrinsic Z-Y-X angles in degrees, returned as (yaw, pitch, roll).
/// At gimbal lock (|pitch| = 90 deg) the roll is forced to 0 and the
/// remaining freedom folded into yaw.
std::array<double, 3> euler_angles_deg(const Mat3& r);

/// Inverse of euler_angles_deg: Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rotation_from_euler_deg(double yaw, double pitch, double roll);

Mat3 rotation_about_axis(const Vec3& axis, double angle_deg);

/// Geodesic rotation angle of R in degrees, in [0, 180].
double rotation_angle_deg(const Mat3& r);

/// Symmetric chamfer distance: mean over a of squared nearest-neighbor
/// distance into b, plus the same term with the roles swapped.
double chamfer(const PointCloud& a, const PointCloud& b);

/// Adds independent N(0, sigma^2) noise to every coordinate; no clipping.
PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, Rng& rng);

enum class ShapeKind { kSphere, kCube, kCylinder, kTorus, kPlane, kGaussianBlobs };

/// Parses "sphere", "cube", "cylinder", "torus", "plane" or "gaussian_blobs";
/// throws std::invalid_argument on anything else.
ShapeKind parse_shape_kind(const std::string& name);
std::string shape_kind_name(ShapeKind kind);

/// n >= 8 points sampled on the named surface, centered at the origin,
/// deterministic per seed. The plane kind is a flat 2:1 rectangular patch,
/// 180-degree symmetric about the z axis.
PointCloud generate_shape(ShapeKind kind, int n, std::uint64_t seed);

}  // namespace rigidreg

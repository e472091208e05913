/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rigidreg/kdtree.hpp"

namespace rigidreg {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegPerRad = 180.0 / kPi;
}  // namespace

bool RigidTransform::is_valid(double tol) const {
  const Mat3 rtr = rotation.transposed() * rotation;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(rtr.m[i][j] - want) > tol) return false;
    }
  return std::abs(rotation.det() - 1.0) <= tol;
}

PointCloud::PointCloud(std::vector<Vec3> points) : pts_(std::move(points)) {
  if (pts_.empty()) throw std::invalid_argument("PointCloud: at least one point required");
  centroid_ = rigidreg::centroid(pts_);
}

Vec3 centroid(std::span<const Vec3> pts) {
  Vec3 sum;
  for (const Vec3& p : pts) sum += p;
  return sum * (1.0 / static_cast<double>(pts.size()));
}

NeighborhoodIndex knn(const PointCloud& cloud, int k, bool include_self) {
  const int n = static_cast<int>(cloud.size());
  const int limit = include_self ? n : n - 1;
  if (k < 1 || k > limit) throw std::invalid_argument("knn: k out of range for cloud size");

  KdTree3 tree(cloud.points());
  NeighborhoodIndex idx;
  idx.k = k;
  idx.flat.resize(static_cast<std::size_t>(n) * k);
  std::vector<int> row;
  for (int i = 0; i < n; ++i) {
    tree.knn(cloud[i], k, row, include_self ? -1 : i);
    std::copy(row.begin(), row.end(), idx.flat.begin() + static_cast<std::size_t>(i) * k);
  }
  return idx;
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud.points()) out.push_back(t.apply(p));
  return PointCloud(std::move(out));
}

namespace {

Mat3 rotation_from_quaternion(double w, double x, double y, double z) {
  Mat3 r;
  r.m[0][0] = 1 - 2 * (y * y + z * z);
  r.m[0][1] = 2 * (x * y - w * z);
  r.m[0][2] = 2 * (x * z + w * y);
  r.m[1][0] = 2 * (x * y + w * z);
  r.m[1][1] = 1 - 2 * (x * x + z * z);
  r.m[1][2] = 2 * (y * z - w * x);
  r.m[2][0] = 2 * (x * z - w * y);
  r.m[2][1] = 2 * (y * z + w * x);
  r.m[2][2] = 1 - 2 * (x * x + y * y);
  return r;
}

Vec3 random_unit_vector(Rng& rng) {
  // Marsaglia: z uniform in [-1,1], azimuth uniform.
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

}  // namespace

Mat3 random_rotation(double max_angle_deg, Rng& rng) {
  if (!(max_angle_deg > 0.0) || max_angle_deg > 180.0)
    throw std::invalid_argument("random_rotation: max_angle_deg must be in (0, 180]");

  if (max_angle_deg >= 180.0) {
    // Haar-uniform over SO(3), Shoemake's quaternion method.
    const double u1 = rng.uniform();
    const double u2 = rng.uniform(0.0, 2.0 * kPi);
    const double u3 = rng.uniform(0.0, 2.0 * kPi);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    return rotation_from_quaternion(a * std::sin(u2), a * std::cos(u2),
                                    b * std::sin(u3), b * std::cos(u3));
  }

  const Vec3 axis = random_unit_vector(rng);
  const double angle = rng.uniform(0.0, max_angle_deg);
  return rotation_about_axis(axis, angle);
}

Mat3 rotation_about_axis(const Vec3& axis, double angle_deg) {
  const double n = axis.norm();
  if (n < 1e-300) throw std::invalid_argument("rotation_about_axis: zero axis");
  const Vec3 u = axis * (1.0 / n);
  const double a = angle_deg / kDegPerRad;
  const double c = std::cos(a), s = std::sin(a), t = 1.0 - c;
  Mat3 r;
  r.m[0][0] = c + u.x * u.x * t;
  r.m[0][1] = u.x * u.y * t - u.z * s;
  r.m[0][2] = u.x * u.z * t + u.y * s;
  r.m[1][0] = u.y * u.x * t + u.z * s;
  r.m[1][1] = c + u.y * u.y * t;
  r.m[1][2] = u.y * u.z * t - u.x * s;
  r.m[2][0] = u.z * u.x * t - u.y * s;
  r.m[2][1] = u.z * u.y * t + u.x * s;
  r.m[2][2] = c + u.z * u.z * t;
  return r;
}

std::array<double, 3> euler_angles_deg(const Mat3& r) {
  // R = Rz(yaw) Ry(pitch) Rx(roll), so r20 = -sin(pitch).
  const double sp = -r.m[2][0];
  double yaw, pitch, roll;
  if (sp >= 1.0 - 1e-12) {
    pitch = kPi / 2.0;
    roll = 0.0;
    yaw = std::atan2(r.m[0][1], r.m[1][1]);
  } else if (sp <= -1.0 + 1e-12) {
    pitch = -kPi / 2.0;
    roll = 0.0;
    yaw = std::atan2(-r.m[0][1], r.m[1][1]);
  } else {
    pitch = std::asin(sp);
    yaw = std::atan2(r.m[1][0], r.m[0][0]);
    roll = std::atan2(r.m[2][1], r.m[2][2]);
  }
  return {yaw * kDegPerRad, pitch * kDegPerRad, roll * kDegPerRad};
}

Mat3 rotation_from_euler_deg(double yaw, double pitch, double roll) {
  return rotation_about_axis({0, 0, 1}, yaw) * rotation_about_axis({0, 1, 0}, pitch) *
         rotation_about_axis({1, 0, 0}, roll);
}

double rotation_angle_deg(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * kDegPerRad;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  const KdTree3 tb(b.points());
  const KdTree3 ta(a.points());
  double sum_ab = 0.0, sum_ba = 0.0;
  double d2;
  for (const Vec3& p : a.points()) {
    tb.nearest(p, &d2);
    sum_ab += d2;
  }
  for (const Vec3& p : b.points()) {
    ta.nearest(p, &d2);
    sum_ba += d2;
  }
  return sum_ab / static_cast<double>(a.size()) + sum_ba / static_cast<double>(b.size());
}

PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud.points()) {
    if (sigma == 0.0) {
      out.push_back(p);
    } else {
      out.push_back({p.x + sigma * rng.gaussian(), p.y + sigma * rng.gaussian(),
                     p.z + sigma * rng.gaussian()});
    }
  }
  return PointCloud(std::move(out));
}

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "sphere") return ShapeKind::kSphere;
  if (name == "cube") return ShapeKind::kCube;
  if (name == "cylinder") return ShapeKind::kCylinder;
  if (name == "torus") return ShapeKind::kTorus;
  if (name == "plane") return ShapeKind::kPlane;
  if (name == "gaussian_blobs") return ShapeKind::kGaussianBlobs;
  throw std::invalid_argument("unknown shape kind: " + name);
}

std::string shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kSphere: return "sphere";
    case ShapeKind::kCube: return "cube";
    case ShapeKind::kCylinder: return "cylinder";
    case ShapeKind::kTorus: return "torus";
    case ShapeKind::kPlane: return "plane";
    case ShapeKind::kGaussianBlobs: return "gaussian_blobs";
  }
  throw std::invalid_argument("unknown shape kind enum");
}

namespace {

Vec3 sample_sphere(Rng& rng) { return random_unit_vector(rng); }

Vec3 sample_cube(Rng& rng) {
  const int face = rng.uniform_int(6);
  const double u = rng.uniform(-1.0, 1.0), v = rng.uniform(-1.0, 1.0);
  switch (face) {
    case 0: return {1, u, v};
    case 1: return {-1, u, v};
    case 2: return {u, 1, v};
    case 3: return {u, -1, v};
    case 4: return {u, v, 1};
    default: return {u, v, -1};
  }
}

Vec3 sample_cylinder(Rng& rng) {
  constexpr double radius = 0.5, half_h = 1.0;
  const double lateral_area = 2.0 * kPi * radius * 2.0 * half_h;
  const double cap_area = kPi * radius * radius;
  const double total = lateral_area + 2.0 * cap_area;
  const double pick = rng.uniform(0.0, total);
  if (pick < lateral_area) {
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    return {radius * std::cos(phi), radius * std::sin(phi), rng.uniform(-half_h, half_h)};
  }
  const double z = pick < lateral_area + cap_area ? half_h : -half_h;
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Vec3 sample_torus(Rng& rng) {
  constexpr double big_r = 1.0, small_r = 0.3;
  // Rejection in the tube angle keeps the surface density uniform.
  double v;
  do {
    v = rng.uniform(0.0, 2.0 * kPi);
  } while (rng.uniform() > (big_r + small_r * std::cos(v)) / (big_r + small_r));
  const double u = rng.uniform(0.0, 2.0 * kPi);
  const double w = big_r + small_r * std::cos(v);
  return {w * std::cos(u), w * std::sin(u), small_r * std::sin(v)};
}

// Flat 2:1 rectangle in z = 0. The underlying surface maps to itself under a
// 180-degree rotation about z; the sampled set is only approximately
// symmetric, which is exactly what the symmetry-failure experiments need.
Vec3 sample_plane(Rng& rng) {
  return {rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 0.5), 0.0};
}

}  // namespace

PointCloud generate_shape(ShapeKind kind, int n, std::uint64_t seed) {
  if (n < 8) throw std::invalid_argument("generate_shape: n must be >= 8");
  Rng rng(derive_seed(seed, 0x5a17u));

  std::vector<Vec3> pts;
  pts.reserve(n);

  if (kind == ShapeKind::kGaussianBlobs) {
    const int n_blobs = 3 + rng.uniform_int(3);
    std::vector<Vec3> centers;
    for (int b = 0; b < n_blobs; ++b)
      centers.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    constexpr double blob_sigma = 0.25;
    for (int i = 0; i < n; ++i) {
      const Vec3& c = centers[rng.uniform_int(n_blobs)];
      pts.push_back({c.x + blob_sigma * rng.gaussian(), c.y + blob_sigma * rng.gaussian(),
                     c.z + blob_sigma * rng.gaussian()});
    }
  } else {
    for (int i = 0; i < n; ++i) {
      switch (kind) {
        case ShapeKind::kSphere: pts.push_back(sample_sphere(rng)); break;
        case ShapeKind::kCube: pts.push_back(sample_cube(rng)); break;
        case ShapeKind::kCylinder: pts.push_back(sample_cylinder(rng)); break;
        case ShapeKind::kTorus: pts.push_back(sample_torus(rng)); break;
        case ShapeKind::kPlane: pts.push_back(sample_plane(rng)); break;
        case ShapeKind::kGaussianBlobs: break;  // handled above
      }
    }
  }

  // Clouds are centered at generation; run manifests record this choice.
  // The sphere keeps its exact radius by skipping the recentering shift.
  if (kind != ShapeKind::kSphere) {
    const Vec3 c = centroid(pts);
    for (Vec3& p : pts) p = p - c;
  }
  return PointCloud(std::move(pts));
}

}  // namespace rigidreg

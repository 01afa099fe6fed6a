// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace s2dgs {

// Matrices act on column vectors (p' = R p + t). Every text or binary format
// in this project stores matrices row-major.
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

bool is_finite(const Vec3& v);

// Rotation + translation in scene units. The rotation is checked to be
// orthonormal with determinant +1 (to 1e-6) on construction.
class RigidTransform {
 public:
  RigidTransform();
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return RigidTransform(); }
  // Expects a 4x4 homogeneous matrix whose last row is (0 0 0 1).
  static RigidTransform from_matrix(const Mat4& m);
  static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad,
                                        const Vec3& translation = Vec3::Zero());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }

  RigidTransform inverse() const;
  Mat4 matrix() const;

  // (a * b).apply(p) == a.apply(b.apply(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

bool is_rotation(const Mat3& r, double tol = 1e-6);

// Angle of the rotation in radians, in [0, pi].
double rotation_angle(const Mat3& r);

Vec3 transform_point(const RigidTransform& t, const Vec3& p);

}  // namespace s2dgs

// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "sparse2dgs/geometry.hpp"

namespace s2dgs {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

// Pinhole camera. Right-handed camera frame: +x right, +y down, +z forward.
// Pixel (i, j) covers [i, i+1) x [j, j+1); its center is (i + 0.5, j + 0.5).
// Cameras are fixed inputs and never optimized.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  RigidTransform world_to_camera;

  // Throws InvalidArgument when fx/fy are not positive or the size is empty.
  void validate() const;

  Vec3 center() const;        // camera center in world coordinates
  Vec3 optical_axis() const;  // camera +z in world coordinates
  Vec3 to_camera(const Vec3& world) const { return world_to_camera.apply(world); }

  // Continuous image coordinates (fx x/z + cx, fy y/z + cy) of a camera-space
  // point with z > 0.
  Vec2 project(const Vec3& camera_point) const;
};

// Ray through the center of pixel (px, py); px, py are pixel indices and may
// be fractional.
Ray pixel_to_ray(const Camera& camera, double px, double py);

// Inverse of pixel_to_ray: the (fractional) pixel index whose ray passes
// through `world`. Empty when the point is not in front of the camera.
std::optional<Vec2> project_to_pixel(const Camera& camera, const Vec3& world);

// Look-at helper used by fixtures: camera at `eye` looking at `target`,
// image "up" roughly along `up`.
RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

// Camera file: JSON array of {fx, fy, cx, cy, width, height,
// world_to_camera: 4x4 row-major}.
std::vector<Camera> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::vector<Camera>& cameras, const std::filesystem::path& path);

}  // namespace s2dgs

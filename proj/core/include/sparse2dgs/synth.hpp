// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sparse2dgs/camera.hpp"
#include "sparse2dgs/image.hpp"
#include "sparse2dgs/pointcloud.hpp"
#include "sparse2dgs/splat.hpp"

namespace s2dgs {

enum class ShapeKind { sphere, plane, two_spheres };

const char* shape_kind_name(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& name);

// Analytic test object with a smooth procedural texture.
//   sphere       unit sphere at the origin
//   plane        square |x|, |y| <= 0.8 in the z = 0 plane
//   two_spheres  radius 0.45 spheres centered at (-0.5, 0, 0) and (0.5, 0, 0)
class Shape {
 public:
  Shape(ShapeKind kind, std::uint64_t texture_seed);

  ShapeKind kind() const { return kind_; }
  // Radius of the bounding sphere around the origin.
  double radius() const;
  // Signed residual of the implicit surface equation (0 on the surface).
  double surface_residual(const Vec3& p) const;
  Vec3 normal(const Vec3& p) const;  // outward (+z for the plane)
  Vec3 texture(const Vec3& p) const;
  // Ray parameter of the first hit, if any.
  std::optional<double> intersect(const Ray& ray) const;
  // Uniform-by-area random surface point.
  Vec3 sample(std::mt19937_64& rng) const;

 private:
  ShapeKind kind_;
  Vec3 freq_[3];
  double phase_[3];
};

struct SyntheticScene {
  ShapeKind kind = ShapeKind::sphere;
  std::uint64_t seed = 0;
  Shape shape{ShapeKind::sphere, 0};
  std::vector<Camera> cameras;
  SplatScene gt_splats;
  std::vector<ImageRGB> gt_images;
  std::vector<Mask> masks;
  // Surface samples seen by at least one camera.
  PointCloud gt_surface_points;

  // Initialization clouds, drawn from the camera-visible surface with
  // analytic normals and texture colors. Deterministic per scene seed.
  PointCloud dense_clean(std::size_t n = 2000) const;
  PointCloud dense_noisy(double sigma, std::size_t n = 2000) const;
  PointCloud sparse(std::size_t n = 100) const;
  // dense_clean(n) plus ceil(fraction n) points at distance
  // [magnitude r, 1.5 magnitude r] from the origin, r = shape radius.
  PointCloud with_outliers(double fraction, double magnitude, std::size_t n = 2000) const;

  bool visible(const Vec3& surface_point) const;
};

// Three cameras on a ring at distance 3 around the origin (azimuths 0, 120,
// 240 degrees), square images with a 50 degree field of view, rendered with
// a black background.
SyntheticScene make_scene(ShapeKind kind, int image_size, std::uint64_t seed);

struct MisalignOptions {
  std::size_t points = 500;
  double noise = 0.0;     // Gaussian noise added to the moved cloud
  bool disjoint = false;  // independent surface samples for the two clouds
  std::uint64_t seed = 0;
};

// Two clouds sampled over the whole surface; the second is moved by
// `transform`.
std::pair<PointCloud, PointCloud> make_misaligned_pair(const SyntheticScene& scene,
                                                       const RigidTransform& transform,
                                                       const MisalignOptions& options = {});

struct GradFixtureOptions {
  int splats = 8;
  int image_size = 16;
  int views = 2;
  // Splat normals are drawn within this angle (radians) of facing the first
  // camera. Near-grazing splats make central differences at h = 1e-5
  // dominated by truncation error rather than by gradient mistakes.
  double max_tilt = 1.0;
};

// Small random scene with random target images for gradient checks.
struct GradFixture {
  SplatScene scene;
  std::vector<Camera> cameras;
  std::vector<ImageRGB> images;
};

GradFixture make_grad_fixture(std::uint64_t seed, const GradFixtureOptions& options = {});

}  // namespace s2dgs

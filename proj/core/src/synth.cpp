// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/synth.hpp"

#include <cmath>
#include <numbers>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/render.hpp"

namespace s2dgs {
namespace {

constexpr double kPlaneHalf = 0.8;
constexpr double kPairRadius = 0.45;
const Vec3 kPairCenters[2] = {Vec3(-0.5, 0.0, 0.0), Vec3(0.5, 0.0, 0.0)};
constexpr double kRingDistance = 3.0;
constexpr double kFovDeg = 50.0;
constexpr std::size_t kGtSplats = 4000;
constexpr std::size_t kGtSurfacePoints = 100000;

// Independent deterministic streams per (scene seed, purpose).
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

std::optional<double> hit_sphere(const Ray& ray, const Vec3& c, double r) {
  const Vec3 w = ray.origin - c;
  const double b = w.dot(ray.direction);
  const double disc = b * b - (w.squaredNorm() - r * r);
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  if (-b - s > 0.0) return -b - s;
  if (-b + s > 0.0) return -b + s;
  return std::nullopt;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const Vec3 v{g(rng), g(rng), g(rng)};
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

std::vector<Vec3> fibonacci_sphere(std::size_t n) {
  std::vector<Vec3> out(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * static_cast<double>(i);
    out[i] = Vec3(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

PointCloud visible_samples(const SyntheticScene& scene, std::size_t n, std::mt19937_64& rng) {
  PointCloud cloud;
  cloud.points.reserve(n);
  std::size_t attempts = 0;
  while (cloud.points.size() < n) {
    if (++attempts > 1000 * n + 1000) throw PipelineError("synth: object is not visible from the cameras");
    const Vec3 p = scene.shape.sample(rng);
    if (!scene.visible(p)) continue;
    cloud.points.push_back(p);
    cloud.normals.push_back(scene.shape.normal(p));
    cloud.colors.push_back(scene.shape.texture(p));
  }
  return cloud;
}

}  // namespace

const char* shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::sphere: return "sphere";
    case ShapeKind::plane: return "plane";
    case ShapeKind::two_spheres: return "two-spheres";
  }
  return "?";
}

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "sphere") return ShapeKind::sphere;
  if (name == "plane") return ShapeKind::plane;
  if (name == "two-spheres") return ShapeKind::two_spheres;
  throw InvalidArgument("unknown scene kind '" + name + "' (expected sphere, plane or two-spheres)");
}

Shape::Shape(ShapeKind kind, std::uint64_t texture_seed) : kind_(kind) {
  auto rng = stream(texture_seed, 100);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  for (int c = 0; c < 3; ++c) {
    freq_[c] = Vec3{g(rng), g(rng), g(rng)};
    phase_[c] = u(rng);
  }
}

double Shape::radius() const {
  switch (kind_) {
    case ShapeKind::sphere: return 1.0;
    case ShapeKind::plane: return kPlaneHalf * std::sqrt(2.0);
    case ShapeKind::two_spheres: return 0.5 + kPairRadius;
  }
  return 1.0;
}

double Shape::surface_residual(const Vec3& p) const {
  switch (kind_) {
    case ShapeKind::sphere: return p.norm() - 1.0;
    case ShapeKind::plane: return p.z();
    case ShapeKind::two_spheres:
      return std::min((p - kPairCenters[0]).norm(), (p - kPairCenters[1]).norm()) - kPairRadius;
  }
  return 0.0;
}

Vec3 Shape::normal(const Vec3& p) const {
  switch (kind_) {
    case ShapeKind::sphere: return p.normalized();
    case ShapeKind::plane: return Vec3::UnitZ();
    case ShapeKind::two_spheres: {
      const Vec3& c = (p - kPairCenters[0]).norm() < (p - kPairCenters[1]).norm() ? kPairCenters[0]
                                                                                  : kPairCenters[1];
      return (p - c).normalized();
    }
  }
  return Vec3::UnitZ();
}

Vec3 Shape::texture(const Vec3& p) const {
  Vec3 c;
  for (int k = 0; k < 3; ++k) c[k] = 0.5 + 0.35 * std::sin(freq_[k].dot(p) + phase_[k]);
  return c;
}

std::optional<double> Shape::intersect(const Ray& ray) const {
  switch (kind_) {
    case ShapeKind::sphere: return hit_sphere(ray, Vec3::Zero(), 1.0);
    case ShapeKind::plane: {
      if (std::abs(ray.direction.z()) < 1e-12) return std::nullopt;
      const double t = -ray.origin.z() / ray.direction.z();
      if (!(t > 0.0)) return std::nullopt;
      const Vec3 p = ray.origin + t * ray.direction;
      if (std::abs(p.x()) > kPlaneHalf || std::abs(p.y()) > kPlaneHalf) return std::nullopt;
      return t;
    }
    case ShapeKind::two_spheres: {
      const auto a = hit_sphere(ray, kPairCenters[0], kPairRadius);
      const auto b = hit_sphere(ray, kPairCenters[1], kPairRadius);
      if (a && b) return std::min(*a, *b);
      return a ? a : b;
    }
  }
  return std::nullopt;
}

Vec3 Shape::sample(std::mt19937_64& rng) const {
  switch (kind_) {
    case ShapeKind::sphere: return random_unit(rng);
    case ShapeKind::plane: {
      std::uniform_real_distribution<double> u(-kPlaneHalf, kPlaneHalf);
      const double x = u(rng);
      return Vec3(x, u(rng), 0.0);
    }
    case ShapeKind::two_spheres: {
      const int which = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
      return kPairCenters[which] + kPairRadius * random_unit(rng);
    }
  }
  return Vec3::Zero();
}

bool SyntheticScene::visible(const Vec3& p) const {
  for (const Camera& cam : cameras) {
    const auto px = project_to_pixel(cam, p);
    if (!px || px->x() < -0.5 || px->y() < -0.5 || px->x() > cam.width - 0.5 ||
        px->y() > cam.height - 0.5) {
      continue;
    }
    const Vec3 o = cam.center();
    const double dist = (p - o).norm();
    const auto t = shape.intersect(Ray{o, (p - o) / dist});
    if (t && std::abs(*t - dist) <= 1e-6 * (1.0 + dist)) return true;
  }
  return false;
}

PointCloud SyntheticScene::dense_clean(std::size_t n) const {
  auto rng = stream(seed, 1);
  return visible_samples(*this, n, rng);
}

PointCloud SyntheticScene::dense_noisy(double sigma, std::size_t n) const {
  if (!(sigma >= 0.0)) throw InvalidArgument("dense_noisy: sigma must be >= 0");
  PointCloud cloud = dense_clean(n);
  auto rng = stream(seed, 2);
  std::normal_distribution<double> g(0.0, sigma);
  for (Vec3& p : cloud.points) {
    const Vec3 noise{g(rng), g(rng), g(rng)};
    p += noise;
  }
  return cloud;
}

PointCloud SyntheticScene::sparse(std::size_t n) const {
  auto rng = stream(seed, 3);
  return visible_samples(*this, n, rng);
}

PointCloud SyntheticScene::with_outliers(double fraction, double magnitude, std::size_t n) const {
  if (!(fraction >= 0.0) || !(magnitude > 0.0)) {
    throw InvalidArgument("with_outliers: fraction must be >= 0 and magnitude > 0");
  }
  PointCloud cloud = dense_clean(n);
  auto rng = stream(seed, 4);
  const std::size_t count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  const double r = shape.radius();
  std::uniform_real_distribution<double> dist(magnitude * r, 1.5 * magnitude * r);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 dir = random_unit(rng);
    cloud.points.push_back(dir * dist(rng));
    cloud.normals.push_back(random_unit(rng));
    cloud.colors.push_back(Vec3::Constant(0.5));
  }
  return cloud;
}

SyntheticScene make_scene(ShapeKind kind, int image_size, std::uint64_t seed) {
  if (image_size < 16) throw InvalidArgument("make_scene: image_size must be >= 16");
  SyntheticScene s;
  s.kind = kind;
  s.seed = seed;
  s.shape = Shape(kind, seed);

  const double elevation = (kind == ShapeKind::plane ? 45.0 : 15.0) * std::numbers::pi / 180.0;
  const double focal = (image_size / 2.0) / std::tan(kFovDeg / 2.0 * std::numbers::pi / 180.0);
  for (int c = 0; c < 3; ++c) {
    const double az = c * 2.0 * std::numbers::pi / 3.0;
    const Vec3 eye = kRingDistance * Vec3(std::cos(elevation) * std::cos(az),
                                          std::cos(elevation) * std::sin(az), std::sin(elevation));
    Camera cam;
    cam.fx = cam.fy = focal;
    cam.cx = cam.cy = image_size / 2.0;
    cam.width = cam.height = image_size;
    cam.world_to_camera = look_at(eye, Vec3::Zero(), Vec3::UnitZ());
    s.cameras.push_back(cam);
  }

  // Ground-truth splats tile the surface with analytic normals.
  std::vector<Vec3> centers;
  double spacing = 0.0;
  switch (kind) {
    case ShapeKind::sphere:
      centers = fibonacci_sphere(kGtSplats);
      spacing = std::sqrt(4.0 * std::numbers::pi / kGtSplats);
      break;
    case ShapeKind::plane: {
      const int side = static_cast<int>(std::sqrt(static_cast<double>(kGtSplats)));
      spacing = 2.0 * kPlaneHalf / side;
      for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
          centers.emplace_back(-kPlaneHalf + (i + 0.5) * spacing, -kPlaneHalf + (j + 0.5) * spacing, 0.0);
        }
      }
      break;
    }
    case ShapeKind::two_spheres:
      for (const Vec3& c : kPairCenters) {
        for (const Vec3& u : fibonacci_sphere(kGtSplats / 2)) centers.push_back(c + kPairRadius * u);
      }
      spacing = kPairRadius * std::sqrt(4.0 * std::numbers::pi / (kGtSplats / 2));
      break;
  }
  for (const Vec3& p : centers) {
    s.gt_splats.splats.push_back(Splat2D::from_decoded(p, frame_from_normal(s.shape.normal(p)),
                                                       0.8 * spacing, 0.8 * spacing, 0.99,
                                                       s.shape.texture(p)));
  }
  s.gt_splats.background = Vec3::Zero();

  RenderConfig rc;
  rc.precision = Precision::f64;
  for (const Camera& cam : s.cameras) {
    s.gt_images.push_back(render_view(s.gt_splats, cam, rc, false).color);
    Mask mask(cam.width, cam.height, 0);
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        if (s.shape.intersect(pixel_to_ray(cam, x, y))) mask(x, y) = 255;
      }
    }
    s.masks.push_back(std::move(mask));
  }

  auto rng = stream(seed, 0);
  s.gt_surface_points = visible_samples(s, kGtSurfacePoints, rng);
  return s;
}

std::pair<PointCloud, PointCloud> make_misaligned_pair(const SyntheticScene& scene,
                                                       const RigidTransform& transform,
                                                       const MisalignOptions& options) {
  if (options.points == 0) throw InvalidArgument("make_misaligned_pair: points must be >= 1");
  auto rng = stream(options.seed, 5);
  PointCloud a, b;
  for (std::size_t i = 0; i < options.points; ++i) a.points.push_back(scene.shape.sample(rng));
  if (options.disjoint) {
    for (std::size_t i = 0; i < options.points; ++i) b.points.push_back(scene.shape.sample(rng));
  } else {
    b.points = a.points;
  }
  std::normal_distribution<double> g(0.0, options.noise > 0.0 ? options.noise : 1.0);
  for (Vec3& p : b.points) {
    p = transform.apply(p);
    if (options.noise > 0.0) p += Vec3{g(rng), g(rng), g(rng)};
  }
  return {a, b};
}

GradFixture make_grad_fixture(std::uint64_t seed, const GradFixtureOptions& options) {
  if (options.splats < 1 || options.image_size < 4 || options.views < 1) {
    throw InvalidArgument("make_grad_fixture: need >= 1 splat, >= 1 view and images of >= 4 px");
  }
  if (!(options.max_tilt >= 0.0)) throw InvalidArgument("make_grad_fixture: max_tilt must be >= 0");
  auto rng = stream(seed, 6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GradFixture f;
  f.scene.background = Vec3(0.1, 0.2, 0.3);
  const Mat3 facing = frame_from_normal(Vec3(0.0, 0.0, -1.0));
  for (int i = 0; i < options.splats; ++i) {
    Splat2D s;
    s.center = Vec3{0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
    const Vec3 axis = Vec3{u(rng), u(rng), u(rng)}.normalized();
    const double tilt = options.max_tilt * std::abs(u(rng));
    const Mat3 tilted = Eigen::AngleAxisd(tilt, axis).toRotationMatrix() * facing;
    const double spin = std::numbers::pi * u(rng);
    s.rotation = quaternion_from_rotation(Eigen::AngleAxisd(spin, tilted.col(2)).toRotationMatrix() * tilted);
    const double su = 0.3 + 0.2 * u(rng);
    const double sv = 0.3 + 0.2 * u(rng);
    s.log_scales = Vec2(std::log(su), std::log(sv));
    s.opacity_logit = 2.0 * u(rng);
    s.color = Vec3{0.5 + 0.4 * u(rng), 0.5 + 0.4 * u(rng), 0.5 + 0.4 * u(rng)};
    f.scene.splats.push_back(s);
  }
  const int n = options.image_size;
  for (int v = 0; v < options.views; ++v) {
    Camera c;
    c.width = c.height = n;
    c.fx = c.fy = 1.25 * n;
    c.cx = c.cy = 0.5 * n;
    const double az = 0.7 * v;
    c.world_to_camera =
        look_at(Vec3(3.0 * std::sin(az), 0.3, -3.0 * std::cos(az)), Vec3::Zero(), Vec3(0.0, -1.0, 0.0));
    f.cameras.push_back(c);
    ImageRGB img(n, n, Vec3::Zero());
    for (std::size_t k = 0; k < img.size(); ++k) {
      img[k] = Vec3{0.5 + 0.4 * u(rng), 0.5 + 0.4 * u(rng), 0.5 + 0.4 * u(rng)};
    }
    f.images.push_back(std::move(img));
  }
  return f;
}

}  // namespace s2dgs

// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/splat.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <limits>
#include <random>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/kdtree.hpp"

namespace s2dgs {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

Mat3 rotation_from_quaternion(const Vec4& q_raw) {
  const Vec4 q = q_raw / q_raw.norm();
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Vec4 quaternion_from_rotation(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  Vec4 out(q.w(), q.x(), q.y(), q.z());
  if (out[0] < 0.0) out = -out;
  return out;
}

Mat3 frame_from_normal(const Vec3& normal) {
  const Vec3 n = normal.normalized();
  const Vec3 tu = n.unitOrthogonal();
  Mat3 f;
  f.col(0) = tu;
  f.col(1) = n.cross(tu);
  f.col(2) = n;
  return f;
}

Splat2D Splat2D::from_decoded(const Vec3& center, const Mat3& frame, double scale_u,
                              double scale_v, double opacity, const Vec3& color) {
  if (!(scale_u > 0.0) || !(scale_v > 0.0)) throw InvalidArgument("splat: scales must be positive");
  if (!(opacity > 0.0) || !(opacity < 1.0)) throw InvalidArgument("splat: opacity must lie in (0, 1)");
  if (!is_rotation(frame)) throw InvalidArgument("splat: tangent frame is not a rotation");
  Splat2D s;
  s.center = center;
  s.rotation = quaternion_from_rotation(frame);
  s.log_scales = Vec2(std::log(scale_u), std::log(scale_v));
  s.opacity_logit = logit(opacity);
  s.color = color;
  return s;
}

void SplatScene::validate() const {
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const Splat2D& s = splats[i];
    const bool finite = is_finite(s.center) && s.rotation.allFinite() && s.log_scales.allFinite() &&
                        std::isfinite(s.opacity_logit) && is_finite(s.color);
    if (!finite) throw InvalidArgument("splat " + std::to_string(i) + ": non-finite parameter");
    if (!(s.rotation.norm() > 1e-12)) {
      throw InvalidArgument("splat " + std::to_string(i) + ": degenerate quaternion");
    }
  }
  if (!is_finite(background)) throw InvalidArgument("scene: non-finite background color");
}

double gaussian_value(double u, double v) { return std::exp(-0.5 * (u * u + v * v)); }

Vec3 splat_point(const Splat2D& splat, double u, double v) {
  const Mat3 f = splat.frame();
  const Vec2 s = splat.scales();
  return splat.center + s.x() * f.col(0) * u + s.y() * f.col(1) * v;
}

std::vector<double> flatten_parameters(const SplatScene& scene) {
  std::vector<double> p(scene.size() * kParamsPerSplat);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Splat2D& s = scene.splats[i];
    double* d = p.data() + i * kParamsPerSplat;
    for (int k = 0; k < 3; ++k) d[kCenter + k] = s.center[k];
    for (int k = 0; k < 4; ++k) d[kRotation + k] = s.rotation[k];
    for (int k = 0; k < 2; ++k) d[kLogScale + k] = s.log_scales[k];
    d[kOpacityLogit] = s.opacity_logit;
    for (int k = 0; k < 3; ++k) d[kColor + k] = s.color[k];
  }
  return p;
}

void unflatten_parameters(std::span<const double> params, SplatScene& scene) {
  if (params.size() != scene.size() * kParamsPerSplat) {
    throw InvalidArgument("unflatten_parameters: size mismatch");
  }
  for (std::size_t i = 0; i < scene.size(); ++i) {
    Splat2D& s = scene.splats[i];
    const double* d = params.data() + i * kParamsPerSplat;
    for (int k = 0; k < 3; ++k) s.center[k] = d[kCenter + k];
    for (int k = 0; k < 4; ++k) s.rotation[k] = d[kRotation + k];
    for (int k = 0; k < 2; ++k) s.log_scales[k] = d[kLogScale + k];
    s.opacity_logit = d[kOpacityLogit];
    for (int k = 0; k < 3; ++k) s.color[k] = d[kColor + k];
  }
}

SplatScene init_splats(const PointCloud& cloud, const InitOptions& options) {
  cloud.validate();
  if (options.knn_k < 1) throw InvalidArgument("init_splats: knn_k must be >= 1");
  if (cloud.size() < static_cast<std::size_t>(options.knn_k) + 1) {
    throw InvalidArgument("init_splats: need at least knn_k + 1 = " +
                          std::to_string(options.knn_k + 1) + " points, got " +
                          std::to_string(cloud.size()));
  }
  const KdTree tree(cloud.points);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SplatScene scene;
  scene.background = options.background;
  scene.splats.reserve(cloud.size());
  const double opacity_logit = logit(options.opacity);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nn = tree.knn(cloud.points[i], static_cast<std::size_t>(options.knn_k), i);
    double mean = 0.0;
    for (const auto& nb : nn) mean += std::sqrt(nb.sq_dist);
    mean /= static_cast<double>(nn.size());
    // coincident points would give a zero scale
    mean = std::max(mean, 1e-7);

    Splat2D s;
    s.center = cloud.points[i];
    if (cloud.has_normals()) {
      s.rotation = quaternion_from_rotation(frame_from_normal(cloud.normals[i]));
    } else {
      Vec4 q{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
      s.rotation = q / q.norm();
    }
    s.log_scales = Vec2::Constant(std::log(mean));
    s.opacity_logit = opacity_logit;
    s.color = cloud.has_colors() ? cloud.colors[i] : Vec3::Constant(0.5);
    scene.splats.push_back(s);
  }
  return scene;
}

}  // namespace s2dgs

// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "sparse2dgs/geometry.hpp"
#include "sparse2dgs/kdtree.hpp"
#include "sparse2dgs/pointcloud.hpp"

namespace s2dgs::test {

// Points on an ellipsoid with distinct semi-axes (1, 0.7, 0.45): unlike a
// sphere every rotation of it is observable, so ICP can be scored on both
// rotation and translation.
inline std::vector<Vec3> ellipsoid_points(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g(rng);
    const double y = g(rng);
    const double z = g(rng);
    const Vec3 d = Vec3(x, y, z).normalized();
    pts.emplace_back(d.x(), 0.7 * d.y(), 0.45 * d.z());
  }
  return pts;
}

struct IcpCase {
  PointCloud source;   // moved copy
  PointCloud target;
  RigidTransform truth;  // maps source onto target
};

// Rotation up to max_angle about a random axis, translation up to max_shift
// in norm, Gaussian noise on the moved cloud.
inline IcpCase make_icp_case(std::uint64_t seed, std::size_t n, double max_angle, double max_shift,
                             double noise) {
  std::mt19937_64 rng(seed);
  IcpCase c;
  c.target.points = ellipsoid_points(n, rng);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec3 axis = Vec3(g(rng), g(rng), g(rng)).normalized();
  const double angle = max_angle * u(rng);
  const Vec3 dir = Vec3(g(rng), g(rng), g(rng)).normalized();
  const double shift = max_shift * u(rng);
  const RigidTransform move = RigidTransform::from_axis_angle(axis, angle, shift * dir);
  for (const Vec3& p : c.target.points) {
    const double nx = g(rng);
    const double ny = g(rng);
    const double nz = g(rng);
    c.source.points.push_back(move.apply(p) + noise * Vec3(nx, ny, nz));
  }
  c.truth = move.inverse();
  return c;
}

struct OutlierCase {
  PointCloud cloud;
  std::vector<std::uint8_t> planted;  // 1 = planted outlier
};

// Unit sphere samples with radial noise sigma, plus outlier_fraction * n
// points pushed 10 to 20 sigma off the surface (inward or outward).
inline OutlierCase make_outlier_case(std::uint64_t seed, std::size_t n, double sigma,
                                     double outlier_fraction) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OutlierCase c;
  const auto on_sphere = [&] {
    const double x = g(rng);
    const double y = g(rng);
    const double z = g(rng);
    return Vec3(x, y, z).normalized();
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = on_sphere();
    c.cloud.points.push_back(d * (1.0 + sigma * g(rng)));
    c.planted.push_back(0);
  }
  const auto outliers = static_cast<std::size_t>(std::ceil(outlier_fraction * static_cast<double>(n)));
  for (std::size_t i = 0; i < outliers; ++i) {
    const Vec3 d = on_sphere();
    const double offset = sigma * (10.0 + 10.0 * u(rng));
    const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
    c.cloud.points.push_back(d * (1.0 + sign * offset));
    c.planted.push_back(1);
  }
  return c;
}

// O(n^2) oracle of statistical outlier removal: mean distance to the k
// nearest other points, kept when <= mean + ratio * sample stddev.
inline std::vector<std::uint8_t> brute_force_outlier_flags(const std::vector<Vec3>& pts, int k,
                                                           double ratio) {
  const std::size_t n = pts.size();
  std::vector<double> mean_dist(n);
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.emplace_back(squared_distance(pts[i], pts[j]), j);
    }
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    double s = 0.0;
    for (int m = 0; m < k; ++m) s += std::sqrt(d[m].first);
    mean_dist[i] = s / k;
  }
  const double mean = std::accumulate(mean_dist.begin(), mean_dist.end(), 0.0) / static_cast<double>(n);
  double sq = 0.0;
  for (double v : mean_dist) sq += (v - mean) * (v - mean);
  const double threshold = mean + ratio * std::sqrt(sq / static_cast<double>(n - 1));
  std::vector<std::uint8_t> kept(n);
  for (std::size_t i = 0; i < n; ++i) kept[i] = mean_dist[i] <= threshold ? 1 : 0;
  return kept;
}

// O(n m) oracle of the one-sided mean nearest distance.
inline double brute_force_mean_nearest(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  double sum = 0.0;
  for (const Vec3& p : from) {
    double best = INFINITY;
    for (const Vec3& q : to) best = std::min(best, (p - q).squaredNorm());
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace s2dgs::test

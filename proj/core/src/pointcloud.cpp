// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/pointcloud.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "sparse2dgs/error.hpp"
#include "sparse2dgs/kdtree.hpp"
#include "sparse2dgs/parallel.hpp"

namespace s2dgs {

void PointCloud::validate() const {
  if (!colors.empty() && colors.size() != points.size()) {
    throw InvalidArgument("point cloud: colors not aligned with points");
  }
  if (!normals.empty() && normals.size() != points.size()) {
    throw InvalidArgument("point cloud: normals not aligned with points");
  }
  for (const Vec3& p : points) {
    if (!is_finite(p)) throw InvalidArgument("point cloud: non-finite coordinate");
  }
  for (const Vec3& n : normals) {
    if (!is_finite(n) || std::abs(n.norm() - 1.0) > 1e-6) {
      throw InvalidArgument("point cloud: normal is not unit length");
    }
  }
}

void PointMap::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("point map: empty dimensions");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (data.size() != n || valid.size() != n) {
    throw InvalidArgument("point map: grid size does not match width x height");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i] && !is_finite(data[i])) throw InvalidArgument("point map: non-finite valid entry");
  }
}

void FusionParams::validate() const {
  if (!(voxel_size > 0.0)) throw InvalidArgument("fusion: voxel_size must be positive");
  if (outlier_k < 1) throw InvalidArgument("fusion: outlier_k must be >= 1");
  if (!(outlier_std_ratio > 0.0)) throw InvalidArgument("fusion: outlier_std_ratio must be positive");
  if (icp_max_iters < 1) throw InvalidArgument("fusion: icp_max_iters must be >= 1");
  if (!(icp_tolerance >= 0.0)) throw InvalidArgument("fusion: icp_tolerance must be >= 0");
}

PointCloud transform_cloud(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
  out.colors = cloud.colors;
  out.normals.reserve(cloud.normals.size());
  for (const Vec3& n : cloud.normals) out.normals.push_back(t.apply_direction(n));
  return out;
}

PointCloud concatenate(const PointCloud& a, const PointCloud& b) {
  PointCloud out;
  out.points = a.points;
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  const auto merge = [&](const std::vector<Vec3>& x, const std::vector<Vec3>& y, std::size_t nx,
                         std::size_t ny) {
    std::vector<Vec3> r;
    if ((!x.empty() || nx == 0) && (!y.empty() || ny == 0) && !(x.empty() && y.empty())) {
      r = x;
      r.insert(r.end(), y.begin(), y.end());
    }
    return r;
  };
  out.colors = merge(a.colors, b.colors, a.size(), b.size());
  out.normals = merge(a.normals, b.normals, a.size(), b.size());
  return out;
}

PointCloud pointmap_to_cloud(const PointMap& map, const ImageRGB* image) {
  map.validate();
  if (image && (image->width() != map.width || image->height() != map.height)) {
    throw InvalidArgument("pointmap_to_cloud: image is " + std::to_string(image->width()) + "x" +
                          std::to_string(image->height()) + " but point map is " +
                          std::to_string(map.width) + "x" + std::to_string(map.height));
  }
  PointCloud cloud;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (!map.is_valid(x, y)) continue;
      cloud.points.push_back(map.at(x, y));
      if (image) cloud.colors.push_back((*image)(x, y));
    }
  }
  return cloud;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw InvalidArgument("voxel_downsample: voxel_size must be positive");
  cloud.validate();
  using Key = std::array<std::int64_t, 3>;
  struct Bucket {
    Vec3 sum = Vec3::Zero();
    Vec3 color = Vec3::Zero();
    Vec3 normal = Vec3::Zero();
    Vec3 first_normal = Vec3::Zero();
    std::size_t count = 0;
  };
  const auto key_of = [voxel_size](const Vec3& p) {
    return Key{static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
               static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
               static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
  };
  std::map<Key, Bucket> buckets;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Bucket& b = buckets[key_of(cloud.points[i])];
    b.sum += cloud.points[i];
    if (cloud.has_colors()) b.color += cloud.colors[i];
    if (cloud.has_normals()) {
      if (b.count == 0) b.first_normal = cloud.normals[i];
      b.normal += cloud.normals[i];
    }
    ++b.count;
  }
  PointCloud out;
  out.points.reserve(buckets.size());
  for (const auto& [key, b] : buckets) {
    const double inv = 1.0 / static_cast<double>(b.count);
    Vec3 c = b.count == 1 ? b.sum : Vec3(b.sum * inv);
    // keep the centroid inside its voxel despite rounding
    for (int k = 0; k < 3; ++k) {
      const double lo = static_cast<double>(key[k]) * voxel_size;
      const double hi = static_cast<double>(key[k] + 1) * voxel_size;
      c[k] = std::clamp(c[k], lo, std::nextafter(hi, lo));
    }
    out.points.push_back(c);
    if (cloud.has_colors()) out.colors.push_back(b.count == 1 ? b.color : Vec3(b.color * inv));
    if (cloud.has_normals()) {
      const double len = b.normal.norm();
      out.normals.push_back(len > 1e-12 ? Vec3(b.normal / len) : b.first_normal);
    }
  }
  return out;
}

OutlierResult remove_statistical_outliers(const PointCloud& cloud, int k, double std_ratio) {
  if (k < 1) throw InvalidArgument("remove_statistical_outliers: k must be >= 1");
  if (!(std_ratio > 0.0)) throw InvalidArgument("remove_statistical_outliers: std_ratio must be positive");
  OutlierResult result;
  const std::size_t n = cloud.size();
  result.kept.assign(n, 1);
  if (n < static_cast<std::size_t>(k) + 1) {
    result.cloud = cloud;
    return result;
  }
  const KdTree tree(cloud.points);
  std::vector<double> mean_dist(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto nn = tree.knn(cloud.points[i], static_cast<std::size_t>(k), i);
      double s = 0.0;
      for (const auto& nb : nn) s += std::sqrt(nb.sq_dist);
      mean_dist[i] = s / static_cast<double>(nn.size());
    }
  });
  const double mean = std::accumulate(mean_dist.begin(), mean_dist.end(), 0.0) / static_cast<double>(n);
  double sq = 0.0;
  for (double d : mean_dist) sq += (d - mean) * (d - mean);
  const double stddev = std::sqrt(sq / static_cast<double>(n - 1));
  const double threshold = mean + std_ratio * stddev;
  for (std::size_t i = 0; i < n; ++i) {
    if (mean_dist[i] > threshold) continue;
    result.cloud.points.push_back(cloud.points[i]);
    if (cloud.has_colors()) result.cloud.colors.push_back(cloud.colors[i]);
    if (cloud.has_normals()) result.cloud.normals.push_back(cloud.normals[i]);
  }
  for (std::size_t i = 0; i < n; ++i) result.kept[i] = mean_dist[i] <= threshold ? 1 : 0;
  return result;
}

namespace {

// Least-squares rigid fit dst ~ R src + t (Kabsch).
RigidTransform fit_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  const double inv = 1.0 / static_cast<double>(src.size());
  Vec3 cs = Vec3::Zero();
  Vec3 cd = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs *= inv;
  cd *= inv;
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 r = v * d * u.transpose();
  return RigidTransform(r, cd - r * cs);
}

struct Matches {
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  double rmse = 0.0;
};

Matches match(const PointCloud& source, const RigidTransform& t, const PointCloud& target,
              const KdTree& tree, double max_dist) {
  const std::size_t n = source.size();
  std::vector<KdTree::Neighbor> nn(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) nn[i] = tree.nearest(t.apply(source.points[i]));
  });
  Matches m;
  const double max_sq = max_dist * max_dist;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (nn[i].sq_dist > max_sq) continue;
    m.src.push_back(source.points[i]);
    m.dst.push_back(target.points[nn[i].index]);
    sq += nn[i].sq_dist;
  }
  m.rmse = m.src.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(m.src.size()));
  return m;
}

}  // namespace

IcpResult icp_align(const PointCloud& source, const PointCloud& target, const FusionParams& params) {
  params.validate();
  if (source.empty() || target.empty()) throw InvalidArgument("icp_align: empty input cloud");
  const double max_dist = params.max_correspondence_distance();
  const KdTree tree(target.points);

  IcpResult result;
  Matches m = match(source, result.transform, target, tree, max_dist);
  if (m.src.empty()) {
    throw InvalidArgument("icp_align: no correspondences within " + std::to_string(max_dist) +
                          " on the first iteration; increase icp_max_corr_dist");
  }
  if (source.size() < 3) {
    spdlog::warn("icp_align: source has {} point(s), too few for a rigid fit; keeping identity",
                 source.size());
    result.rmse = m.rmse;
    result.correspondences = m.src.size();
    return result;
  }
  double prev_rmse = m.rmse;
  for (int iter = 0; iter < params.icp_max_iters; ++iter) {
    if (m.src.size() < 3) break;
    result.transform = fit_rigid(m.src, m.dst);
    result.iterations = iter + 1;
    m = match(source, result.transform, target, tree, max_dist);
    if (m.src.empty()) break;
    const bool converged = std::abs(prev_rmse - m.rmse) < params.icp_tolerance;
    prev_rmse = m.rmse;
    if (converged) break;
  }
  result.rmse = m.rmse;
  result.correspondences = m.src.size();
  return result;
}

PointCloud integrate_clouds(const PointCloud& colmap, const PointCloud& dust3r,
                            const FusionParams& params) {
  params.validate();
  if (colmap.empty() || dust3r.empty()) throw InvalidArgument("integrate_clouds: empty input cloud");
  const PointCloud down = voxel_downsample(dust3r, params.voxel_size);
  const OutlierResult filtered =
      remove_statistical_outliers(down, params.outlier_k, params.outlier_std_ratio);
  if (filtered.cloud.empty()) {
    spdlog::warn("integrate_clouds: no DUSt3R points left after outlier removal");
    return colmap;
  }
  const IcpResult icp = icp_align(filtered.cloud, colmap, params);
  spdlog::info("integrate_clouds: {} -> {} -> {} DUSt3R points, ICP rmse {:.6g} after {} iterations",
               dust3r.size(), down.size(), filtered.cloud.size(), icp.rmse, icp.iterations);
  return concatenate(colmap, transform_cloud(icp.transform, filtered.cloud));
}

}  // namespace s2dgs

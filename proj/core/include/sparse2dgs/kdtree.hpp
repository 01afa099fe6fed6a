// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sparse2dgs/geometry.hpp"

namespace s2dgs {

// Exact nearest-neighbor index over a fixed point set. Results are identical
// to a brute-force scan: neighbors are ordered by (squared distance, index),
// so ties always resolve to the lower index.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index;
    double sq_dist;
  };

  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  // Requires a non-empty tree.
  Neighbor nearest(const Vec3& query) const;

  // Up to k neighbors sorted ascending. `exclude` drops one index (the query
  // point itself when querying a member of the set).
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k,
                            std::optional<std::size_t> exclude = std::nullopt) const;

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    int left = -1;
    int right = -1;
    int dim = 0;
    double split = 0.0;
  };

  int build(std::size_t begin, std::size_t end);

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace s2dgs

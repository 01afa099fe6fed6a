// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

#include "sparse2dgs/error.hpp"

namespace s2dgs {
namespace {

constexpr std::size_t kLeafSize = 12;

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }
}

int KdTree::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int dim = 0;
  (hi - lo).maxCoeff(&dim);
  if (hi[dim] == lo[dim]) return id;  // all points coincide

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     const double pa = points_[a][dim];
                     const double pb = points_[b][dim];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][dim];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  Node& node = nodes_[id];
  node.dim = dim;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

KdTree::Neighbor KdTree::nearest(const Vec3& query) const {
  if (points_.empty()) throw InvalidArgument("kd-tree: nearest() on an empty tree");
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  // Explicit stack: (node, lower bound on squared distance).
  std::vector<std::pair<int, double>> stack;
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound > best.sq_dist) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const Neighbor cand{order_[i], squared_distance(query, points_[order_[i]])};
        if (closer(cand, best)) best = cand;
      }
      continue;
    }
    const double diff = query[node.dim] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    stack.emplace_back(far, diff * diff);
    stack.emplace_back(near, bound);
  }
  return best;
}

std::vector<KdTree::Neighbor> KdTree::knn(const Vec3& query, std::size_t k,
                                          std::optional<std::size_t> exclude) const {
  std::vector<Neighbor> heap;  // max-heap under `closer`
  if (k == 0 || points_.empty()) return heap;
  heap.reserve(k + 1);
  const auto worst = [&] {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.front().sq_dist;
  };
  std::vector<std::pair<int, double>> stack;
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound > worst()) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        if (exclude && *exclude == idx) continue;
        const Neighbor cand{idx, squared_distance(query, points_[idx])};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), closer);
        } else if (closer(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), closer);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), closer);
        }
      }
      continue;
    }
    const double diff = query[node.dim] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    stack.emplace_back(far, diff * diff);
    stack.emplace_back(near, bound);
  }
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

}  // namespace s2dgs

// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

// Precision-generic pieces shared by the forward renderer and the backward
// pass. Not part of the public API.

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sparse2dgs/camera.hpp"
#include "sparse2dgs/render.hpp"
#include "sparse2dgs/splat.hpp"

namespace s2dgs::detail {

template <typename Real>
using V3 = Eigen::Matrix<Real, 3, 1>;

// Per-view splat data, relative to the camera center o.
template <typename Real>
struct PreparedSplat {
  V3<Real> w;     // p - o
  V3<Real> tu_s;  // t_u / s_u
  V3<Real> tv_s;  // t_v / s_v
  V3<Real> n;
  Real alpha;
  // Inclusive pixel bounding box of the splat's 3-sigma footprint (plus one
  // pixel of margin); x0 > x1 when it misses the image.
  int x0, y0, x1, y1;
};

template <typename Real>
struct PlaneHit {
  Real u, v, t, denom;
};

// origin + t d = p + s_u t_u u + s_v t_v v with w = p - origin.
template <typename Real>
inline bool intersect_plane(const V3<Real>& d, const V3<Real>& w, const V3<Real>& n,
                            const V3<Real>& tu_s, const V3<Real>& tv_s, PlaneHit<Real>& hit) {
  const Real denom = d.dot(n);
  if (!(std::abs(denom) >= Real(1e-9))) return false;
  const Real t = w.dot(n) / denom;
  if (!(t > Real(0))) return false;
  const V3<Real> h = t * d - w;
  hit.u = h.dot(tu_s);
  hit.v = h.dot(tv_s);
  hit.t = t;
  hit.denom = denom;
  return true;
}

// Squared local radius at which G reaches the cutoff.
inline double cutoff_radius_sq(double gaussian_cutoff) { return -2.0 * std::log(gaussian_cutoff); }

template <typename Real>
std::vector<PreparedSplat<Real>> prepare_splats(const SplatScene& scene, const Camera& camera,
                                                const RenderConfig& config) {
  const Vec3 o = camera.center();
  const double r = std::sqrt(cutoff_radius_sq(config.gaussian_cutoff)) * (1.0 + 1e-6);
  std::vector<PreparedSplat<Real>> out(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Splat2D& s = scene.splats[i];
    const Mat3 f = s.frame();
    const Vec2 sc = s.scales();
    PreparedSplat<Real>& ps = out[i];
    ps.w = (s.center - o).cast<Real>();
    ps.tu_s = (f.col(0) / sc.x()).cast<Real>();
    ps.tv_s = (f.col(1) / sc.y()).cast<Real>();
    ps.n = f.col(2).cast<Real>();
    ps.alpha = static_cast<Real>(s.opacity());

    ps.x0 = 0;
    ps.y0 = 0;
    ps.x1 = camera.width - 1;
    ps.y1 = camera.height - 1;
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    bool behind = false;
    for (int cu = -1; cu <= 1 && !behind; cu += 2) {
      for (int cv = -1; cv <= 1; cv += 2) {
        const Vec3 corner = s.center + (cu * r * sc.x()) * f.col(0) + (cv * r * sc.y()) * f.col(1);
        const auto px = project_to_pixel(camera, corner);
        if (!px || !px->allFinite()) {
          behind = true;
          break;
        }
        min_x = std::min(min_x, px->x());
        min_y = std::min(min_y, px->y());
        max_x = std::max(max_x, px->x());
        max_y = std::max(max_y, px->y());
      }
    }
    if (behind) continue;  // footprint may wrap around; keep the full image
    const double lo_x = std::floor(min_x) - 1.0, hi_x = std::ceil(max_x) + 1.0;
    const double lo_y = std::floor(min_y) - 1.0, hi_y = std::ceil(max_y) + 1.0;
    if (hi_x < 0.0 || hi_y < 0.0 || lo_x > camera.width - 1 || lo_y > camera.height - 1) {
      ps.x0 = ps.y0 = 1;
      ps.x1 = ps.y1 = 0;
      continue;
    }
    ps.x0 = static_cast<int>(std::max(lo_x, 0.0));
    ps.y0 = static_cast<int>(std::max(lo_y, 0.0));
    ps.x1 = static_cast<int>(std::min(hi_x, static_cast<double>(camera.width - 1)));
    ps.y1 = static_cast<int>(std::min(hi_y, static_cast<double>(camera.height - 1)));
  }
  return out;
}

}  // namespace s2dgs::detail

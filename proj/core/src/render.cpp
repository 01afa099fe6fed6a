// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/render.hpp"

#include <algorithm>

#include "detail/raster.hpp"
#include "sparse2dgs/error.hpp"
#include "sparse2dgs/parallel.hpp"

namespace s2dgs {

using detail::V3;

const char* precision_name(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& name) {
  if (name == "f32") return Precision::f32;
  if (name == "f64") return Precision::f64;
  throw InvalidArgument("unknown precision '" + name + "' (expected f32 or f64)");
}

void RenderConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("render: epsilon must be > 0");
  if (!(transmittance_cutoff > 0.0 && transmittance_cutoff < 1.0)) {
    throw InvalidArgument("render: transmittance_cutoff must lie in (0, 1)");
  }
  if (!(gaussian_cutoff > 0.0 && gaussian_cutoff < 1.0)) {
    throw InvalidArgument("render: gaussian_cutoff must lie in (0, 1)");
  }
  if (max_contribs_per_ray < 1) throw InvalidArgument("render: max_contribs_per_ray must be >= 1");
}

std::optional<RayHit> intersect_ray_splat(const Ray& ray, const Splat2D& splat) {
  return intersect_ray_splat(ray, splat, ray.direction);
}

std::optional<RayHit> intersect_ray_splat(const Ray& ray, const Splat2D& splat,
                                          const Vec3& depth_axis) {
  const Mat3 f = splat.frame();
  const Vec2 s = splat.scales();
  detail::PlaneHit<double> hit{};
  if (!detail::intersect_plane<double>(ray.direction, splat.center - ray.origin, f.col(2),
                                       f.col(0) / s.x(), f.col(1) / s.y(), hit)) {
    return std::nullopt;
  }
  return RayHit{hit.u, hit.v, hit.t, hit.t * ray.direction.dot(depth_axis)};
}

CompositeResult composite_ray(std::span<const CompositeInput> sorted, const Vec3& background,
                              const RenderConfig& config) {
  config.validate();
  CompositeResult out;
  out.weights.assign(sorted.size(), 0.0);
  out.transmittance.assign(sorted.size(), 0.0);
  double T = 1.0;
  double depth_sum = 0.0;
  int used = 0;
  std::size_t i = 0;
  for (; i < sorted.size(); ++i) {
    const CompositeInput& c = sorted[i];
    out.transmittance[i] = T;
    const double a = c.alpha * c.gaussian;
    if (a == 0.0) continue;
    const double w = a * T;
    out.weights[i] = w;
    out.color += w * c.color.cwiseMax(0.0).cwiseMin(1.0);
    depth_sum += w * c.depth;
    out.acc_weight += w;
    out.normal += w * c.normal;
    T *= 1.0 - a;
    ++used;
    if (T < config.transmittance_cutoff || used >= config.max_contribs_per_ray) {
      ++i;
      break;
    }
  }
  for (; i < sorted.size(); ++i) out.transmittance[i] = T;
  out.color += (1.0 - out.acc_weight) * background;
  out.depth = depth_sum / (out.acc_weight + config.epsilon);
  return out;
}

std::span<const Contribution> RenderBuffers::pixel_contribs(int x, int y) const {
  if (offsets.empty()) return {};
  const std::size_t p = color.index(x, y);
  return std::span<const Contribution>(contribs.data() + offsets[p], offsets[p + 1] - offsets[p]);
}

namespace {

struct Candidate {
  std::uint32_t splat;
  bool flipped;
  double z, g, u, v;
};

template <typename Real>
RenderBuffers render_impl(const SplatScene& scene, const Camera& camera, const RenderConfig& config,
                          bool retain) {
  const int W = camera.width, H = camera.height;
  const auto prepared = detail::prepare_splats<Real>(scene, camera, config);

  // Per-pixel candidate lists (CSR), each in ascending splat order.
  std::vector<std::uint32_t> bin_offsets, bins, all;
  if (config.culling) {
    bin_offsets.assign(static_cast<std::size_t>(W) * H + 1, 0);
    for (const auto& ps : prepared) {
      for (int y = ps.y0; y <= ps.y1; ++y) {
        for (int x = ps.x0; x <= ps.x1; ++x) ++bin_offsets[static_cast<std::size_t>(y) * W + x + 1];
      }
    }
    for (std::size_t p = 0; p + 1 < bin_offsets.size(); ++p) bin_offsets[p + 1] += bin_offsets[p];
    bins.resize(bin_offsets.back());
    std::vector<std::uint32_t> fill(bin_offsets.begin(), bin_offsets.end() - 1);
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      const auto& ps = prepared[i];
      for (int y = ps.y0; y <= ps.y1; ++y) {
        for (int x = ps.x0; x <= ps.x1; ++x) bins[fill[static_cast<std::size_t>(y) * W + x]++] = static_cast<std::uint32_t>(i);
      }
    }
  } else {
    all.resize(prepared.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  }

  RenderBuffers out;
  out.color = ImageRGB(W, H, Vec3::Zero());
  out.depth = DepthMap(W, H, 0.0);
  out.acc_weight = Grid<double>(W, H, 0.0);
  out.splat_normal = NormalMap(W, H, Vec3::Zero());

  const Vec3 axis = camera.optical_axis();
  const Real max_q = static_cast<Real>(detail::cutoff_radius_sq(config.gaussian_cutoff) * (1.0 + 1e-3));
  const Real g_cut = static_cast<Real>(config.gaussian_cutoff);
  const Real t_cut = static_cast<Real>(config.transmittance_cutoff);
  const Real eps = static_cast<Real>(config.epsilon);
  std::vector<V3<Real>> colors(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    colors[i] = scene.splats[i].color.cwiseMax(0.0).cwiseMin(1.0).cast<Real>();
  }
  const V3<Real> bg = scene.background.cast<Real>();

  std::vector<std::vector<Contribution>> row_contribs(retain ? H : 0);
  std::vector<std::uint32_t> counts(retain ? static_cast<std::size_t>(W) * H : 0);

  parallel_for(static_cast<std::size_t>(H), [&](std::size_t begin, std::size_t end) {
    std::vector<Candidate> cand;
    for (std::size_t yy = begin; yy < end; ++yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < W; ++x) {
        const Ray ray = pixel_to_ray(camera, x, y);
        const V3<Real> d = ray.direction.cast<Real>();
        const Real kappa = static_cast<Real>(ray.direction.dot(axis));
        std::span<const std::uint32_t> list = all;
        if (config.culling) {
          const std::size_t p = static_cast<std::size_t>(y) * W + x;
          list = std::span<const std::uint32_t>(bins.data() + bin_offsets[p], bin_offsets[p + 1] - bin_offsets[p]);
        }
        cand.clear();
        for (const std::uint32_t j : list) {
          const auto& ps = prepared[j];
          detail::PlaneHit<Real> hit;
          if (!detail::intersect_plane<Real>(d, ps.w, ps.n, ps.tu_s, ps.tv_s, hit)) continue;
          const Real q = hit.u * hit.u + hit.v * hit.v;
          if (!(q <= max_q)) continue;
          const Real g = std::exp(Real(-0.5) * q);
          if (!(g >= g_cut)) continue;
          cand.push_back({j, hit.denom > Real(0), static_cast<double>(hit.t * kappa),
                          static_cast<double>(g), static_cast<double>(hit.u),
                          static_cast<double>(hit.v)});
        }
        std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
          return a.z < b.z || (a.z == b.z && a.splat < b.splat);
        });

        Real T = 1, acc = 0, depth_sum = 0;
        V3<Real> color = V3<Real>::Zero(), normal = V3<Real>::Zero();
        int used = 0;
        for (const Candidate& c : cand) {
          const auto& ps = prepared[c.splat];
          const Real a = ps.alpha * static_cast<Real>(c.g);
          if (a == Real(0)) continue;
          const Real w = a * T;
          const V3<Real> n = c.flipped ? V3<Real>(-ps.n) : ps.n;
          color += w * colors[c.splat];
          depth_sum += w * static_cast<Real>(c.z);
          acc += w;
          normal += w * n;
          if (retain) {
            Contribution rec;
            rec.splat = c.splat;
            rec.flipped = c.flipped;
            rec.weight = static_cast<double>(w);
            rec.depth = c.z;
            rec.gaussian = c.g;
            rec.alpha = static_cast<double>(ps.alpha);
            rec.u = c.u;
            rec.v = c.v;
            rec.transmittance = static_cast<double>(T);
            rec.normal = n.template cast<double>();
            row_contribs[yy].push_back(rec);
            ++counts[out.color.index(x, y)];
          }
          T *= Real(1) - a;
          ++used;
          if (T < t_cut || used >= config.max_contribs_per_ray) break;
        }
        color += (Real(1) - acc) * bg;
        out.color(x, y) = color.template cast<double>();
        out.depth(x, y) = static_cast<double>(depth_sum / (acc + eps));
        out.acc_weight(x, y) = static_cast<double>(acc);
        out.splat_normal(x, y) = normal.template cast<double>();
      }
    }
  });

  if (retain) {
    out.offsets.resize(counts.size() + 1);
    out.offsets[0] = 0;
    for (std::size_t p = 0; p < counts.size(); ++p) out.offsets[p + 1] = out.offsets[p] + counts[p];
    out.contribs.reserve(out.offsets.back());
    for (auto& row : row_contribs) {
      out.contribs.insert(out.contribs.end(), row.begin(), row.end());
      std::vector<Contribution>().swap(row);
    }
  }
  return out;
}

}  // namespace

RenderBuffers render_view(const SplatScene& scene, const Camera& camera, const RenderConfig& config,
                          bool retain) {
  config.validate();
  camera.validate();
  if (config.precision == Precision::f32) return render_impl<float>(scene, camera, config, retain);
  return render_impl<double>(scene, camera, config, retain);
}

NormalMap depth_to_normal(const DepthMap& depth, const Camera& camera,
                          const Grid<double>* acc_weight) {
  const int W = depth.width(), H = depth.height();
  if (W != camera.width || H != camera.height) {
    throw InvalidArgument("depth_to_normal: depth map size does not match the camera");
  }
  if (acc_weight != nullptr && !acc_weight->same_shape(depth)) {
    throw InvalidArgument("depth_to_normal: weight map size does not match the depth map");
  }
  NormalMap out(W, H, Vec3::Zero());
  auto valid = [&](int x, int y) {
    return depth(x, y) > 0.0 && (acc_weight == nullptr || (*acc_weight)(x, y) > 0.0);
  };
  auto point = [&](int x, int y) -> Vec3 {
    return Vec3((x + 0.5 - camera.cx) / camera.fx, (y + 0.5 - camera.cy) / camera.fy, 1.0) *
           depth(x, y);
  };
  for (int y = 1; y + 1 < H; ++y) {
    for (int x = 1; x + 1 < W; ++x) {
      if (!valid(x, y) || !valid(x - 1, y) || !valid(x + 1, y) || !valid(x, y - 1) ||
          !valid(x, y + 1)) {
        continue;
      }
      const Vec3 dx = 0.5 * (point(x + 1, y) - point(x - 1, y));
      const Vec3 dy = 0.5 * (point(x, y + 1) - point(x, y - 1));
      Vec3 n = dx.cross(dy);
      const double len = n.norm();
      if (!(len > 0.0) || !std::isfinite(len)) continue;
      n /= len;
      if (n.dot(point(x, y)) > 0.0) n = -n;
      out(x, y) = n;
    }
  }
  return out;
}

}  // namespace s2dgs

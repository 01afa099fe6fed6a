// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/grad.hpp"

#include <array>
#include <cmath>

#include "detail/raster.hpp"
#include "sparse2dgs/error.hpp"
#include "sparse2dgs/parallel.hpp"

namespace s2dgs {
namespace {

// Per-splat accumulator: center, d/d t_u, d/d t_v, d/d n (columns of the
// rotation), log scales, opacity logit, color.
enum Slot : int {
  kP = 0,
  kTu = 3,
  kTv = 6,
  kN = 9,
  kLs = 12,
  kLogit = 14,
  kCol = 15,
  kSlots = 18,
};

struct Record {
  std::uint32_t splat;
  std::array<double, kSlots> g;
};

// d R / d q for R = rotation_from_quaternion(q) with |q| = 1, q = (w, x, y, z).
std::array<Mat3, 4> rotation_partials(const Vec4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  std::array<Mat3, 4> d;
  d[0] << 0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0;
  d[1] << 0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x;
  d[2] << -4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y;
  d[3] << -4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0;
  return d;
}

void backward_view(const SplatScene& scene, const Camera& camera, const ImageRGB& gt,
                   const Objective& objective, LossReport& report,
                   std::vector<std::array<double, kSlots>>& acc) {
  const RenderConfig& rc = objective.render;
  const LossWeights& lw = objective.weights;
  const RenderBuffers buf = render_view(scene, camera, rc, true);
  const NormalMap normals = world_depth_normals(buf, camera);
  const ColorLossGradient cg =
      color_loss_with_gradient(buf.color, gt, lw.lambda, lw.dssim_window, lw.dssim_sigma, true);
  report += view_loss(buf, gt, normals, lw, &cg.loss);
  const ImageRGB& grad_color = cg.gradient;
  std::size_t rays_d = 0, rays_n = 0;
  for (std::size_t p = 0; p < normals.size(); ++p) {
    if (buf.offsets[p + 1] > buf.offsets[p]) ++rays_d;
    if (!normals[p].isZero(0.0)) ++rays_n;
  }
  const double cd = rays_d > 0 ? lw.alpha / static_cast<double>(rays_d) : 0.0;
  const double cn = rays_n > 0 ? lw.beta / static_cast<double>(rays_n) : 0.0;

  const auto prepared = detail::prepare_splats<double>(scene, camera, rc);
  std::vector<Vec3> colors(scene.size());
  std::vector<std::array<bool, 3>> color_free(scene.size());
  std::vector<Vec2> scales(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Vec3& c = scene.splats[i].color;
    colors[i] = c.cwiseMax(0.0).cwiseMin(1.0);
    for (int k = 0; k < 3; ++k) color_free[i][k] = c[k] >= 0.0 && c[k] <= 1.0;
    scales[i] = scene.splats[i].scales();
  }
  const Vec3 bg = scene.background;
  const Vec3 axis = camera.optical_axis();
  const int W = camera.width, H = camera.height;

  std::vector<std::vector<Record>> rows(static_cast<std::size_t>(H));
  parallel_for(static_cast<std::size_t>(H), [&](std::size_t begin, std::size_t end) {
    std::vector<double> e, gz;
    for (std::size_t yy = begin; yy < end; ++yy) {
      const int y = static_cast<int>(yy);
      auto& out = rows[yy];
      for (int x = 0; x < W; ++x) {
        const auto list = buf.pixel_contribs(x, y);
        if (list.empty()) continue;
        const std::size_t p = buf.color.index(x, y);
        const Vec3& gC = grad_color[p];
        const Vec3& N = normals[p];
        const bool has_n = !N.isZero(0.0);
        const Vec3 d = pixel_to_ray(camera, x, y).direction;
        const double kappa = d.dot(axis);

        const std::size_t K = list.size();
        double w_total = 0.0, wz_total = 0.0;
        for (const Contribution& c : list) {
          w_total += c.weight;
          wz_total += c.weight * c.depth;
        }
        // Direct partials of the pixel loss with respect to w_i and z_i.
        e.assign(K, 0.0);
        gz.assign(K, 0.0);
        double a_front = 0.0, b_front = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
          const Contribution& c = list[i];
          const double a_back = w_total - a_front - c.weight;
          const double b_back = wz_total - b_front - c.weight * c.depth;
          const double dd_dw = c.depth * a_front - b_front + b_back - c.depth * a_back;
          e[i] = gC.dot(colors[c.splat] - bg) + cd * dd_dw;
          if (has_n) e[i] += cn * (1.0 - c.normal.dot(N));
          gz[i] = cd * c.weight * (a_front - a_back);
          a_front += c.weight;
          b_front += c.weight * c.depth;
        }

        // w_i = a_i T_i; R accumulates sum_{i>k} e_i a_i prod_{k<j<i} (1 - a_j).
        double R = 0.0;
        for (std::size_t kk = K; kk-- > 0;) {
          const Contribution& c = list[kk];
          const double a = c.alpha * c.gaussian;
          const double dl_da = c.transmittance * (e[kk] - R);
          R = e[kk] * a + (1.0 - a) * R;

          Record rec;
          rec.splat = c.splat;
          auto& g = rec.g;
          g.fill(0.0);
          g[kLogit] = dl_da * c.gaussian * c.alpha * (1.0 - c.alpha);
          const double dG = dl_da * c.alpha;
          const double gu = -c.u * c.gaussian * dG;
          const double gv = -c.v * c.gaussian * dG;
          for (int k = 0; k < 3; ++k) {
            if (color_free[c.splat][k]) g[kCol + k] = c.weight * gC[k];
          }

          const auto& ps = prepared[c.splat];
          detail::PlaneHit<double> hit{};
          if (!detail::intersect_plane<double>(d, ps.w, ps.n, ps.tu_s, ps.tv_s, hit)) {
            // only reachable when reduced precision accepted a grazing hit
            out.push_back(rec);
            continue;
          }
          const Vec3 h = hit.t * d - ps.w;
          const double g_t = gz[kk] * kappa + gu * d.dot(ps.tu_s) + gv * d.dot(ps.tv_s);
          const Vec3 dp = g_t * ps.n / hit.denom - gu * ps.tu_s - gv * ps.tv_s;
          Vec3 dn = -g_t * h / hit.denom;
          if (has_n) {
            const Vec3 g_oriented = -cn * c.weight * N;
            dn += c.flipped ? Vec3(-g_oriented) : g_oriented;
          }
          const Vec2& s = scales[c.splat];
          const Vec3 dtu = gu * h / s.x();
          const Vec3 dtv = gv * h / s.y();
          for (int k = 0; k < 3; ++k) {
            g[kP + k] = dp[k];
            g[kTu + k] = dtu[k];
            g[kTv + k] = dtv[k];
            g[kN + k] = dn[k];
          }
          g[kLs] = -gu * c.u;
          g[kLs + 1] = -gv * c.v;
          out.push_back(rec);
        }
      }
    }
  });

  // Fixed-order reduction: identical results for any thread count.
  for (const auto& row : rows) {
    for (const Record& rec : row) {
      auto& a = acc[rec.splat];
      for (int k = 0; k < kSlots; ++k) a[k] += rec.g[k];
    }
  }
}

void check_views(const Objective& o) {
  if (o.cameras.size() != o.images.size()) {
    throw InvalidArgument("objective: " + std::to_string(o.cameras.size()) + " cameras but " +
                          std::to_string(o.images.size()) + " images");
  }
}

std::vector<std::int64_t> piece_signature(const SplatScene& scene, const Objective& objective) {
  std::vector<std::int64_t> sig;
  for (const Splat2D& s : scene.splats) {
    for (int k = 0; k < 3; ++k) sig.push_back(s.color[k] < 0.0 ? -1 : (s.color[k] > 1.0 ? 1 : 0));
  }
  for (std::size_t v = 0; v < objective.cameras.size(); ++v) {
    const RenderBuffers buf = render_view(scene, objective.cameras[v], objective.render, true);
    const ImageRGB& gt = objective.images[v];
    for (std::size_t p = 0; p + 1 < buf.offsets.size(); ++p) {
      sig.push_back(static_cast<std::int64_t>(buf.offsets[p + 1] - buf.offsets[p]));
      for (std::uint32_t k = buf.offsets[p]; k < buf.offsets[p + 1]; ++k) {
        const Contribution& c = buf.contribs[k];
        sig.push_back(static_cast<std::int64_t>(c.splat) * 2 + (c.flipped ? 1 : 0));
      }
      for (int k = 0; k < 3; ++k) {
        const double diff = buf.color[p][k] - gt[p][k];
        sig.push_back(diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0));
      }
    }
  }
  return sig;
}

}  // namespace

void Objective::validate() const {
  check_views(*this);
  render.validate();
  weights.validate();
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    cameras[v].validate();
    if (images[v].width() != cameras[v].width || images[v].height() != cameras[v].height) {
      throw InvalidArgument("objective: image " + std::to_string(v) + " does not match its camera size");
    }
  }
}

std::vector<NormalMap> depth_normals(const SplatScene& scene, const Objective& objective) {
  std::vector<NormalMap> out;
  out.reserve(objective.cameras.size());
  for (const Camera& cam : objective.cameras) {
    out.push_back(world_depth_normals(render_view(scene, cam, objective.render, false), cam));
  }
  return out;
}

LossReport evaluate_loss(const SplatScene& scene, const Objective& objective,
                         const std::vector<NormalMap>* frozen_normals) {
  objective.validate();
  if (frozen_normals != nullptr && frozen_normals->size() != objective.cameras.size()) {
    throw InvalidArgument("evaluate_loss: one normal map per view required");
  }
  LossReport total;
  for (std::size_t v = 0; v < objective.cameras.size(); ++v) {
    const RenderBuffers buf = render_view(scene, objective.cameras[v], objective.render, true);
    const NormalMap n = frozen_normals != nullptr ? (*frozen_normals)[v]
                                                  : world_depth_normals(buf, objective.cameras[v]);
    total += view_loss(buf, objective.images[v], n, objective.weights);
  }
  return total;
}

BackwardResult backward(const SplatScene& scene, const Objective& objective) {
  objective.validate();
  std::vector<std::array<double, kSlots>> acc(scene.size());
  for (auto& a : acc) a.fill(0.0);
  BackwardResult result;
  for (std::size_t v = 0; v < objective.cameras.size(); ++v) {
    backward_view(scene, objective.cameras[v], objective.images[v], objective, result.report, acc);
  }

  auto& g = result.gradients.values;
  g.assign(scene.size() * kParamsPerSplat, 0.0);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const auto& a = acc[i];
    double* out = g.data() + i * kParamsPerSplat;
    for (int k = 0; k < 3; ++k) out[kCenter + k] = a[kP + k];
    out[kLogScale] = a[kLs];
    out[kLogScale + 1] = a[kLs + 1];
    out[kOpacityLogit] = a[kLogit];
    for (int k = 0; k < 3; ++k) out[kColor + k] = a[kCol + k];

    const Vec4& q = scene.splats[i].rotation;
    const double qn = q.norm();
    const Vec4 qh = q / qn;
    const auto dR = rotation_partials(qh);
    Mat3 G;
    G.col(0) = Vec3(a[kTu], a[kTu + 1], a[kTu + 2]);
    G.col(1) = Vec3(a[kTv], a[kTv + 1], a[kTv + 2]);
    G.col(2) = Vec3(a[kN], a[kN + 1], a[kN + 2]);
    Vec4 dqh;
    for (int k = 0; k < 4; ++k) dqh[k] = dR[k].cwiseProduct(G).sum();
    const Vec4 dq = (dqh - qh * qh.dot(dqh)) / qn;
    for (int k = 0; k < 4; ++k) out[kRotation + k] = dq[k];
  }
  return result;
}

GradCheckResult check_gradient(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> x, std::span<const double> analytic,
                               const GradCheckOptions& options,
                               const std::function<bool(std::span<const double>)>& same_piece) {
  if (x.size() != analytic.size()) throw InvalidArgument("check_gradient: gradient size mismatch");
  if (!(options.h > 0.0)) throw InvalidArgument("check_gradient: h must be > 0");
  std::vector<std::size_t> params = options.params;
  if (params.empty()) {
    params.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) params[i] = i;
  }
  GradCheckResult result;
  std::vector<double> xp(x.begin(), x.end());
  for (const std::size_t i : params) {
    if (i >= x.size()) throw InvalidArgument("check_gradient: parameter index out of range");
    GradCheckEntry entry;
    entry.param = i;
    entry.analytic = analytic[i];
    xp[i] = x[i] + options.h;
    const bool plus_ok = !same_piece || same_piece(xp);
    const double f_plus = f(xp);
    xp[i] = x[i] - options.h;
    const bool minus_ok = !same_piece || same_piece(xp);
    const double f_minus = f(xp);
    xp[i] = x[i];
    entry.numeric = (f_plus - f_minus) / (2.0 * options.h);
    entry.skipped = !(plus_ok && minus_ok);
    const double diff = std::abs(entry.analytic - entry.numeric);
    entry.error = diff <= options.abs_floor
                      ? 0.0
                      : diff / std::max(std::abs(entry.analytic), std::abs(entry.numeric));
    if (entry.skipped) {
      ++result.skipped;
    } else {
      ++result.checked;
      if (entry.error > result.max_error || !std::isfinite(entry.error)) {
        result.max_error = entry.error;
        result.worst_param = i;
      }
    }
    result.entries.push_back(entry);
  }
  return result;
}

GradCheckResult finite_diff_check(const SplatScene& scene, const Objective& objective,
                                  const GradCheckOptions& options) {
  objective.validate();
  const std::vector<NormalMap> frozen = depth_normals(scene, objective);
  const BackwardResult analytic = backward(scene, objective);
  const std::vector<double> x = flatten_parameters(scene);
  const std::vector<std::int64_t> base = piece_signature(scene, objective);

  SplatScene work = scene;
  auto f = [&](std::span<const double> p) {
    unflatten_parameters(p, work);
    return evaluate_loss(work, objective, &frozen).total;
  };
  auto same = [&](std::span<const double> p) {
    unflatten_parameters(p, work);
    return piece_signature(work, objective) == base;
  };
  return check_gradient(f, x, analytic.gradients.values, options, same);
}

}  // namespace s2dgs

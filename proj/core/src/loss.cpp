// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparse2dgs/error.hpp"

namespace s2dgs {
namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_same(const ImageRGB& a, const ImageRGB& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": image sizes differ (" + std::to_string(a.width()) +
                          "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                          "x" + std::to_string(b.height()) + ")");
  }
  if (a.empty()) throw InvalidArgument(std::string(what) + ": empty image");
}

// Zero-padded separable convolution, output the size of the input.
std::vector<double> blur(const std::vector<double>& in, int W, int H, const std::vector<double>& g) {
  const int r = static_cast<int>(g.size()) / 2;
  std::vector<double> tmp(in.size(), 0.0), out(in.size(), 0.0);
  for (int y = 0; y < H; ++y) {
    const double* row = in.data() + static_cast<std::size_t>(y) * W;
    double* dst = tmp.data() + static_cast<std::size_t>(y) * W;
    for (int x = 0; x < W; ++x) {
      const int k0 = std::max(-r, -x), k1 = std::min(r, W - 1 - x);
      double s = 0.0;
      for (int k = k0; k <= k1; ++k) s += g[k + r] * row[x + k];
      dst[x] = s;
    }
  }
  for (int y = 0; y < H; ++y) {
    const int k0 = std::max(-r, -y), k1 = std::min(r, H - 1 - y);
    double* dst = out.data() + static_cast<std::size_t>(y) * W;
    for (int k = k0; k <= k1; ++k) {
      const double w = g[k + r];
      const double* src = tmp.data() + static_cast<std::size_t>(y + k) * W;
      for (int x = 0; x < W; ++x) dst[x] += w * src[x];
    }
  }
  return out;
}

std::vector<double> channel(const ImageRGB& img, int c) {
  std::vector<double> out(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i][c];
  return out;
}

// Per-channel SSIM map and, optionally, d(mean SSIM)/d(a) for that channel.
struct SsimChannel {
  double ssim_sum = 0.0;
  std::vector<double> grad;
};

SsimChannel ssim_channel(const std::vector<double>& x, const std::vector<double>& y, int W, int H,
                         const std::vector<double>& g, bool with_grad, double count) {
  const std::size_t n = x.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = blur(x, W, H, g), my = blur(y, W, H, g);
  const auto sxx = blur(xx, W, H, g), syy = blur(yy, W, H, g), sxy = blur(xy, W, H, g);

  SsimChannel out;
  std::vector<double> d_mu, d_sxx, d_sxy;
  if (with_grad) {
    d_mu.resize(n);
    d_sxx.resize(n);
    d_sxy.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cxy = sxy[i] - mx[i] * my[i];
    const double a1 = 2.0 * mx[i] * my[i] + kC1;
    const double a2 = 2.0 * cxy + kC2;
    const double b1 = mx[i] * mx[i] + my[i] * my[i] + kC1;
    const double b2 = vx + vy + kC2;
    const double s = (a1 * a2) / (b1 * b2);
    out.ssim_sum += s;
    if (with_grad) {
      d_mu[i] = (2.0 * my[i] * (a2 - a1) - s * 2.0 * mx[i] * (b2 - b1)) / (b1 * b2) / count;
      d_sxx[i] = -s / b2 / count;
      d_sxy[i] = 2.0 * a1 / (b1 * b2) / count;
    }
  }
  if (with_grad) {
    const auto g_mu = blur(d_mu, W, H, g), g_sxx = blur(d_sxx, W, H, g), g_sxy = blur(d_sxy, W, H, g);
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.grad[i] = g_mu[i] + 2.0 * x[i] * g_sxx[i] + y[i] * g_sxy[i];
  }
  return out;
}

void check_window(int window, double sigma) {
  if (window < 1 || window % 2 == 0) throw InvalidArgument("ssim: window must be a positive odd integer");
  if (!(sigma > 0.0)) throw InvalidArgument("ssim: sigma must be > 0");
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw InvalidArgument("loss weights: alpha and beta must be >= 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("loss weights: lambda must lie in [0, 1]");
  check_window(dssim_window, dssim_sigma);
}

LossReport& LossReport::operator+=(const LossReport& o) {
  total += o.total;
  color += o.color;
  l1 += o.l1;
  dssim += o.dssim;
  distortion += o.distortion;
  normal += o.normal;
  return *this;
}

std::vector<double> gaussian_window(int size, double sigma) {
  check_window(size, sigma);
  std::vector<double> g(static_cast<std::size_t>(size));
  const int r = size / 2;
  for (int k = -r; k <= r; ++k) g[k + r] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  const double sum = std::accumulate(g.begin(), g.end(), 0.0);
  for (double& v : g) v /= sum;
  return g;
}

double mean_ssim(const ImageRGB& a, const ImageRGB& b, int window, double sigma) {
  check_same(a, b, "ssim");
  const auto g = gaussian_window(window, sigma);
  const double count = 3.0 * static_cast<double>(a.size());
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    sum += ssim_channel(channel(a, c), channel(b, c), a.width(), a.height(), g, false, count).ssim_sum;
  }
  return sum / count;
}

ColorLossGradient color_loss_with_gradient(const ImageRGB& rendered, const ImageRGB& gt, double lambda,
                                           int window, double sigma, bool with_grad) {
  check_same(rendered, gt, "color_loss");
  const auto g = gaussian_window(window, sigma);
  const double count = 3.0 * static_cast<double>(rendered.size());
  ColorLossGradient out;
  if (with_grad) out.gradient = ImageRGB(rendered.width(), rendered.height(), Vec3::Zero());
  double l1 = 0.0;
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double diff = rendered[i][c] - gt[i][c];
      l1 += std::abs(diff);
      if (with_grad) {
        const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        out.gradient[i][c] = (1.0 - lambda) * sign / count;
      }
    }
  }
  double ssim = 0.0;
  for (int c = 0; c < 3; ++c) {
    const bool grad_c = with_grad && lambda != 0.0;
    const auto s = ssim_channel(channel(rendered, c), channel(gt, c), rendered.width(), rendered.height(),
                                g, grad_c, count);
    ssim += s.ssim_sum;
    if (grad_c) {
      for (std::size_t i = 0; i < rendered.size(); ++i) out.gradient[i][c] += -0.5 * lambda * s.grad[i];
    }
  }
  out.loss.l1 = l1 / count;
  out.loss.dssim = (1.0 - ssim / count) / 2.0;
  out.loss.color = (1.0 - lambda) * out.loss.l1 + lambda * out.loss.dssim;
  return out;
}

ColorLoss color_loss(const ImageRGB& rendered, const ImageRGB& gt, double lambda, int window,
                     double sigma) {
  return color_loss_with_gradient(rendered, gt, lambda, window, sigma, false).loss;
}

ImageRGB color_loss_gradient(const ImageRGB& rendered, const ImageRGB& gt, double lambda, int window,
                             double sigma) {
  return color_loss_with_gradient(rendered, gt, lambda, window, sigma, true).gradient;
}

double ray_distortion(std::span<const double> weights, std::span<const double> depths) {
  if (weights.size() != depths.size()) throw InvalidArgument("ray_distortion: list sizes differ");
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return depths[a] < depths[b] || (depths[a] == depths[b] && weights[a] < weights[b]);
  });
  // With depths ascending, sum_{j<i} w_j |z_i - z_j| = z_i A_i - B_i.
  double a = 0.0, b = 0.0, total = 0.0;
  for (const std::size_t i : order) {
    total += weights[i] * (depths[i] * a - b);
    a += weights[i];
    b += weights[i] * depths[i];
  }
  return total;
}

double ray_normal_consistency(std::span<const double> weights, std::span<const Vec3> normals,
                              const Vec3& depth_normal) {
  if (weights.size() != normals.size()) throw InvalidArgument("ray_normal_consistency: list sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] * (1.0 - normals[i].dot(depth_normal));
  return total;
}

double distortion_loss(const RenderBuffers& buffers) {
  if (!buffers.retained()) throw InvalidArgument("distortion_loss: render was not retained");
  double sum = 0.0;
  std::size_t rays = 0;
  std::vector<double> w, z;
  for (std::size_t p = 0; p + 1 < buffers.offsets.size(); ++p) {
    const std::uint32_t begin = buffers.offsets[p], end = buffers.offsets[p + 1];
    if (begin == end) continue;
    // contributions are stored depth-sorted
    double a = 0.0, b = 0.0, ray = 0.0;
    for (std::uint32_t k = begin; k < end; ++k) {
      const Contribution& c = buffers.contribs[k];
      ray += c.weight * (c.depth * a - b);
      a += c.weight;
      b += c.weight * c.depth;
    }
    sum += ray;
    ++rays;
  }
  return rays == 0 ? 0.0 : sum / static_cast<double>(rays);
}

double normal_loss(const RenderBuffers& buffers, const NormalMap& depth_normal) {
  if (!buffers.retained()) throw InvalidArgument("normal_loss: render was not retained");
  if (!depth_normal.same_shape(buffers.color)) throw InvalidArgument("normal_loss: normal map size mismatch");
  double sum = 0.0;
  std::size_t rays = 0;
  for (std::size_t p = 0; p < depth_normal.size(); ++p) {
    const Vec3& N = depth_normal[p];
    if (N.isZero(0.0)) continue;
    double ray = 0.0;
    for (std::uint32_t k = buffers.offsets[p]; k < buffers.offsets[p + 1]; ++k) {
      const Contribution& c = buffers.contribs[k];
      ray += c.weight * (1.0 - c.normal.dot(N));
    }
    sum += ray;
    ++rays;
  }
  return rays == 0 ? 0.0 : sum / static_cast<double>(rays);
}

NormalMap world_depth_normals(const RenderBuffers& buffers, const Camera& camera) {
  NormalMap n = depth_to_normal(buffers.depth, camera, &buffers.acc_weight);
  const Mat3 to_world = camera.world_to_camera.rotation().transpose();
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!n[i].isZero(0.0)) n[i] = to_world * n[i];
  }
  return n;
}

LossReport view_loss(const RenderBuffers& buffers, const ImageRGB& gt, const NormalMap& depth_normal,
                     const LossWeights& weights, const ColorLoss* precomputed) {
  weights.validate();
  const ColorLoss c = precomputed ? *precomputed
                                  : color_loss(buffers.color, gt, weights.lambda, weights.dssim_window,
                                               weights.dssim_sigma);
  LossReport r;
  r.color = c.color;
  r.l1 = c.l1;
  r.dssim = c.dssim;
  r.distortion = distortion_loss(buffers);
  r.normal = normal_loss(buffers, depth_normal);
  r.total = r.color + weights.alpha * r.distortion + weights.beta * r.normal;
  return r;
}

LossReport total_loss(std::span<const RenderBuffers> buffers, std::span<const ImageRGB> gt,
                      std::span<const Camera> cameras, const LossWeights& weights) {
  if (buffers.size() != gt.size() || buffers.size() != cameras.size()) {
    throw InvalidArgument("total_loss: views, images and cameras differ in count");
  }
  LossReport total;
  for (std::size_t v = 0; v < buffers.size(); ++v) {
    total += view_loss(buffers[v], gt[v], world_depth_normals(buffers[v], cameras[v]), weights);
  }
  return total;
}

}  // namespace s2dgs

// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "sparse2dgs/error.hpp"

namespace s2dgs {
namespace {

void check_finite(const LossReport& r, int iteration) {
  const std::pair<const char*, double> parts[] = {{"l1", r.l1},
                                                  {"dssim", r.dssim},
                                                  {"distortion", r.distortion},
                                                  {"normal", r.normal},
                                                  {"total", r.total}};
  for (const auto& [name, value] : parts) {
    if (!std::isfinite(value)) {
      throw NumericError("iteration " + std::to_string(iteration) + ": non-finite " + name + " loss");
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 0) throw InvalidArgument("train: iterations must be >= 0");
  const double all[] = {rates.center, rates.center_final, rates.rotation, rates.scale, rates.opacity,
                        rates.color};
  for (const double r : all) {
    if (!(r > 0.0)) throw InvalidArgument("train: learning rates must be > 0");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw InvalidArgument("train: adam betas must lie in [0, 1)");
  }
  if (!(adam.eps >= 0.0)) throw InvalidArgument("train: adam eps must be >= 0");
  if (snapshot_interval < 0) throw InvalidArgument("train: snapshot_interval must be >= 0");
  if (!(distortion_warmup >= 0.0 && distortion_warmup <= 1.0) ||
      !(normal_warmup >= 0.0 && normal_warmup <= 1.0)) {
    throw InvalidArgument("train: warmup fractions must lie in [0, 1]");
  }
  weights.validate();
  render.validate();
}

void adam_step(std::span<double> params, std::span<const double> grads, std::span<const double> rates,
               AdamState& state, const AdamParams& adam) {
  const std::size_t n = params.size();
  if (grads.size() != n || rates.size() != n) throw InvalidArgument("adam_step: size mismatch");
  if (state.m.empty()) state.m.assign(n, 0.0);
  if (state.v.empty()) state.v.assign(n, 0.0);
  if (state.m.size() != n || state.v.size() != n) throw InvalidArgument("adam_step: moment size mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(adam.beta1, state.t);
  const double c2 = 1.0 - std::pow(adam.beta2, state.t);
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = adam.beta1 * state.m[i] + (1.0 - adam.beta1) * grads[i];
    state.v[i] = adam.beta2 * state.v[i] + (1.0 - adam.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= rates[i] * m_hat / (std::sqrt(v_hat) + adam.eps);
  }
}

std::vector<double> parameter_rates(std::size_t splat_count, const LearningRates& rates, int iteration,
                                    int iterations) {
  const double frac =
      iterations > 0 ? std::clamp(static_cast<double>(iteration) / iterations, 0.0, 1.0) : 0.0;
  const double center =
      std::exp((1.0 - frac) * std::log(rates.center) + frac * std::log(rates.center_final));
  std::vector<double> out(splat_count * kParamsPerSplat);
  for (std::size_t i = 0; i < splat_count; ++i) {
    double* r = out.data() + i * kParamsPerSplat;
    for (int k = 0; k < 3; ++k) r[kCenter + k] = center;
    for (int k = 0; k < 4; ++k) r[kRotation + k] = rates.rotation;
    for (int k = 0; k < 2; ++k) r[kLogScale + k] = rates.scale;
    r[kOpacityLogit] = rates.opacity;
    for (int k = 0; k < 3; ++k) r[kColor + k] = rates.color;
  }
  return out;
}

TrainResult train(const SplatScene& initial, const std::vector<Camera>& cameras,
                  const std::vector<ImageRGB>& images, const TrainConfig& config,
                  const TrainCallbacks& callbacks) {
  config.validate();
  initial.validate();
  if (cameras.empty()) throw InvalidArgument("train: at least one view is required");
  if (initial.empty()) throw InvalidArgument("train: scene has no splats");
  Objective objective{cameras, images, config.render, config.weights};
  objective.validate();

  TrainResult result;
  result.scene = initial;
  result.history.reserve(static_cast<std::size_t>(config.iterations) + 1);
  std::vector<double> params = flatten_parameters(result.scene);
  AdamState state;

  Objective scheduled = objective;
  for (int it = 0; it < config.iterations; ++it) {
    const double frac = static_cast<double>(it) / config.iterations;
    scheduled.weights.alpha = frac >= config.distortion_warmup ? config.weights.alpha : 0.0;
    scheduled.weights.beta = frac >= config.normal_warmup ? config.weights.beta : 0.0;
    BackwardResult br = backward(result.scene, scheduled);
    br.report.total = br.report.color + config.weights.alpha * br.report.distortion +
                      config.weights.beta * br.report.normal;
    check_finite(br.report, it);
    for (std::size_t i = 0; i < br.gradients.values.size(); ++i) {
      if (!std::isfinite(br.gradients.values[i])) {
        throw NumericError("iteration " + std::to_string(it) + ": non-finite gradient for splat " +
                           std::to_string(i / kParamsPerSplat));
      }
    }
    result.history.push_back(br.report);
    if (callbacks.on_loss) callbacks.on_loss(it, br.report);
    if (it % 100 == 0) {
      spdlog::debug("iter {:5d}  total {:.6f}  l1 {:.6f}  dssim {:.6f}  dist {:.3e}  normal {:.6f}", it,
                    br.report.total, br.report.l1, br.report.dssim, br.report.distortion,
                    br.report.normal);
    }
    const auto rates = parameter_rates(result.scene.size(), config.rates, it, config.iterations);
    adam_step(params, br.gradients.values, rates, state, config.adam);
    unflatten_parameters(params, result.scene);
    if (config.snapshot_interval > 0 && (it + 1) % config.snapshot_interval == 0 &&
        callbacks.on_snapshot) {
      callbacks.on_snapshot(it + 1, result.scene);
    }
  }

  const LossReport final_loss = evaluate_loss(result.scene, objective);
  check_finite(final_loss, config.iterations);
  result.history.push_back(final_loss);
  if (callbacks.on_loss) callbacks.on_loss(config.iterations, final_loss);
  return result;
}

void write_loss_csv(const std::vector<LossReport>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iter,total,l1,dssim,distortion,normal\n";
  out.precision(17);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const LossReport& r = history[i];
    out << i << ',' << r.total << ',' << r.l1 << ',' << r.dssim << ',' << r.distortion << ','
        << r.normal << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace s2dgs

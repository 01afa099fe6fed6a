// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "sparse2dgs/grad.hpp"
#include "sparse2dgs/loss.hpp"
#include "sparse2dgs/render.hpp"
#include "sparse2dgs/splat.hpp"

namespace s2dgs {

struct LearningRates {
  double center = 1.6e-4;        // decays exponentially to center_final
  double center_final = 1.6e-6;
  double rotation = 1e-3;
  double scale = 5e-3;
  double opacity = 5e-2;
  double color = 2.5e-3;
};

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-15;
};

struct TrainConfig {
  int iterations = 10000;
  LossWeights weights;
  LearningRates rates;
  AdamParams adam;
  RenderConfig render;
  std::uint64_t seed = 0;     // recorded for reproducibility; full-batch training draws no randoms
  int snapshot_interval = 0;  // 0 = no periodic snapshots
  // Fractions of the run during which the distortion and normal terms are
  // left out of the gradient (they are always reported).
  double distortion_warmup = 0.1;
  double normal_warmup = 7.0 / 30.0;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int t = 0;  // steps taken
};

// One bias-corrected Adam step with a per-parameter learning rate:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   x <- x - lr (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
// Increments state.t first; empty moments are zero-initialized.
void adam_step(std::span<double> params, std::span<const double> grads, std::span<const double> rates,
               AdamState& state, const AdamParams& adam);

// Learning rate of every flat parameter at `iteration` of `iterations`.
std::vector<double> parameter_rates(std::size_t splat_count, const LearningRates& rates, int iteration,
                                    int iterations);

struct TrainResult {
  SplatScene scene;
  // history[i] is the loss after i updates; history.size() == iterations + 1.
  std::vector<LossReport> history;
};

struct TrainCallbacks {
  std::function<void(int iteration, const LossReport&)> on_loss;
  std::function<void(int iteration, const SplatScene&)> on_snapshot;
};

// Full-batch Adam over all views. The splat count never changes. Throws
// NumericError naming the iteration and loss component when the loss or a
// gradient becomes non-finite.
TrainResult train(const SplatScene& initial, const std::vector<Camera>& cameras,
                  const std::vector<ImageRGB>& images, const TrainConfig& config,
                  const TrainCallbacks& callbacks = {});

// CSV with header iter,total,l1,dssim,distortion,normal.
void write_loss_csv(const std::vector<LossReport>& history, const std::filesystem::path& path);

}  // namespace s2dgs

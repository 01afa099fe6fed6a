// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "sparse2dgs/pointcloud.hpp"
#include "sparse2dgs/splat.hpp"
#include "sparse2dgs/surface.hpp"
#include "sparse2dgs/train.hpp"

namespace s2dgs::cli {

using Json = nlohmann::ordered_json;

struct EvalOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};

// Every tunable of the fuse -> init -> train -> extract -> eval chain.
struct PipelineConfig {
  FusionParams fusion;
  InitOptions init;
  TrainConfig train;
  TsdfParams tsdf;
  EvalOptions eval;
};

// Objects may omit keys (defaults are kept). Unknown keys and wrong types
// throw ParseError naming the offending key.
Json to_json(const TrainConfig& c);
Json to_json(const PipelineConfig& c);
void from_json(const Json& j, TrainConfig& c);
void from_json(const Json& j, PipelineConfig& c);

// A train config file may hold either a bare TrainConfig object or a full
// pipeline config, in which case its "train" section is used.
TrainConfig load_train_config(const std::filesystem::path& path);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace s2dgs::cli

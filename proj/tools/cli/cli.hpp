// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace s2dgs::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // a stage ran but could not succeed
inline constexpr int kExitUsage = 2;    // bad arguments, missing or unreadable files

// Entry point of the `sparse2dgs` tool; argv[0] is the program name. Errors
// are reported on stderr as a single line "error[<kind>]: <message>".
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args exclude the program name

// Per-view file inside an image or mask directory: 000.ppm, 001.ppm, ...
// `suffix` includes the dot, e.g. ".ppm" or "_depth.pfm".
std::filesystem::path view_file(const std::filesystem::path& dir, std::size_t view,
                                const char* suffix);

// The stages behind the subcommands. `pipeline` calls exactly these, so its
// outputs match running the subcommands one by one with the same config.
void fuse_stage(const std::filesystem::path& colmap, const std::filesystem::path& dust3r,
                const FusionParams& params, const std::filesystem::path& out);
void init_stage(const std::filesystem::path& cloud, const InitOptions& options,
                const std::filesystem::path& out);
void train_stage(const std::filesystem::path& scene, const std::filesystem::path& cameras,
                 const std::filesystem::path& images, const TrainConfig& config,
                 const std::filesystem::path& out_dir, int log_every);
void render_stage(const std::filesystem::path& scene, const std::filesystem::path& cameras,
                  const RenderConfig& render, const std::filesystem::path& out_dir);
void extract_stage(const std::filesystem::path& scene, const std::filesystem::path& cameras,
                   const std::optional<std::filesystem::path>& masks, const TsdfParams& params,
                   const RenderConfig& render, const std::filesystem::path& out);
Json eval_stage(const std::filesystem::path& mesh, const std::filesystem::path& gt,
                const EvalOptions& options);

}  // namespace s2dgs::cli

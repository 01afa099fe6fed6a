// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/cli.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sparse2dgs/camera.hpp"
#include "sparse2dgs/error.hpp"
#include "sparse2dgs/eval.hpp"
#include "sparse2dgs/grad.hpp"
#include "sparse2dgs/image.hpp"
#include "sparse2dgs/parallel.hpp"
#include "sparse2dgs/ply.hpp"
#include "sparse2dgs/render.hpp"
#include "sparse2dgs/surface.hpp"
#include "sparse2dgs/synth.hpp"

#ifndef S2DGS_VERSION
#define S2DGS_VERSION "unknown"
#endif

namespace s2dgs::cli {
namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
}

void require_dir(const fs::path& path) {
  if (!fs::is_directory(path)) throw IoError("no such directory: " + path.string());
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void make_parent(const fs::path& file) {
  if (file.has_parent_path()) make_dirs(file.parent_path());
}

std::vector<Camera> read_cameras(const fs::path& path) {
  require_file(path);
  return load_cameras(path);
}

SplatScene read_scene(const fs::path& path) {
  require_file(path);
  return load_checkpoint(path);
}

std::vector<ImageRGB> read_images(const fs::path& dir, const std::vector<Camera>& cameras) {
  require_dir(dir);
  std::vector<ImageRGB> out;
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const fs::path p = view_file(dir, v, ".ppm");
    require_file(p);
    ImageRGB img = read_ppm(p);
    if (img.width() != cameras[v].width || img.height() != cameras[v].height) {
      throw InvalidArgument(p.string() + ": image size does not match camera " + std::to_string(v));
    }
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<Mask> read_masks(const fs::path& dir, const std::vector<Camera>& cameras) {
  require_dir(dir);
  std::vector<Mask> out;
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const fs::path p = view_file(dir, v, ".pgm");
    require_file(p);
    Mask m = read_pgm(p);
    if (m.width() != cameras[v].width || m.height() != cameras[v].height) {
      throw InvalidArgument(p.string() + ": mask size does not match camera " + std::to_string(v));
    }
    out.push_back(std::move(m));
  }
  return out;
}

PointCloud read_cloud(const fs::path& path) {
  require_file(path);
  if (path.extension() == ".s2pm") return pointmap_to_cloud(load_pointmap(path));
  return load_ply(path);
}

template <typename T>
void override_with(const std::optional<T>& flag, T& value) {
  if (flag) value = *flag;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Options shared by every subcommand that reads a pipeline config.
struct ConfigFlag {
  std::optional<fs::path> path;

  PipelineConfig load() const {
    if (!path) return {};
    require_file(*path);
    return load_pipeline_config(*path);
  }
};

void add_config_flag(CLI::App* cmd, ConfigFlag& flag) {
  cmd->add_option("--config", flag.path,
                  "Pipeline config JSON (as written by `synth`); flags override its values");
}

void add_precision_flag(CLI::App* cmd, std::optional<std::string>& precision) {
  cmd->add_option("--precision", precision, "Render precision, f32 or f64 (default f64)")
      ->check(CLI::IsMember({"f32", "f64"}));
}

}  // namespace

fs::path view_file(const fs::path& dir, std::size_t view, const char* extension) {
  char name[32];
  std::snprintf(name, sizeof(name), "%03zu%s", view, extension);
  return dir / name;
}

void fuse_stage(const fs::path& colmap, const fs::path& dust3r, const FusionParams& params,
                const fs::path& out) {
  params.validate();
  const PointCloud a = read_cloud(colmap);
  const PointCloud b = read_cloud(dust3r);
  const PointCloud fused = integrate_clouds(a, b, params);
  if (fused.empty()) throw PipelineError("fuse: the fused cloud is empty");
  make_parent(out);
  save_ply(fused, out);
  spdlog::info("fuse: {} + {} points -> {} points in {}", a.size(), b.size(), fused.size(), out.string());
}

void init_stage(const fs::path& cloud, const InitOptions& options, const fs::path& out) {
  const PointCloud c = read_cloud(cloud);
  if (c.empty()) throw PipelineError("init: " + cloud.string() + " holds no points");
  const SplatScene scene = init_splats(c, options);
  make_parent(out);
  save_checkpoint(scene, out);
  spdlog::info("init: {} splats written to {}", scene.size(), out.string());
}

void train_stage(const fs::path& scene_path, const fs::path& cameras_path, const fs::path& images_dir,
                 const TrainConfig& config, const fs::path& out_dir, int log_every) {
  config.validate();
  const SplatScene scene = read_scene(scene_path);
  const std::vector<Camera> cameras = read_cameras(cameras_path);
  const std::vector<ImageRGB> images = read_images(images_dir, cameras);
  make_dirs(out_dir);
  const fs::path snapshots = out_dir / "snapshots";
  if (config.snapshot_interval > 0) make_dirs(snapshots);

  TrainCallbacks callbacks;
  callbacks.on_loss = [&](int it, const LossReport& r) {
    if (log_every > 0 && (it % log_every == 0 || it == config.iterations)) {
      spdlog::info("iter {:6d}  total {:.6f}  l1 {:.5f}  dssim {:.5f}  dist {:.4e}  normal {:.5f}", it,
                   r.total, r.l1, r.dssim, r.distortion, r.normal);
    }
  };
  callbacks.on_snapshot = [&](int it, const SplatScene& s) {
    char name[32];
    std::snprintf(name, sizeof(name), "iter_%06d.ckpt", it);
    save_checkpoint(s, snapshots / name);
  };
  TrainResult result;
  try {
    result = train(scene, cameras, images, config, callbacks);
  } catch (const NumericError& e) {
    throw NumericError(std::string("train: ") + e.what());
  }
  save_checkpoint(result.scene, out_dir / "final.ckpt");
  write_loss_csv(result.history, out_dir / "loss.csv");
  spdlog::info("train: loss {:.6f} -> {:.6f}; wrote {}", result.history.front().total,
               result.history.back().total, (out_dir / "final.ckpt").string());
}

void render_stage(const fs::path& scene_path, const fs::path& cameras_path, const RenderConfig& render,
                  const fs::path& out_dir) {
  const SplatScene scene = read_scene(scene_path);
  const std::vector<Camera> cameras = read_cameras(cameras_path);
  make_dirs(out_dir);
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const RenderBuffers buf = render_view(scene, cameras[v], render, false);
    write_ppm(buf.color, view_file(out_dir, v, ".ppm"));
    write_pfm(buf.depth, view_file(out_dir, v, "_depth.pfm"));
    write_pfm(buf.acc_weight, view_file(out_dir, v, "_acc.pfm"));
  }
  spdlog::info("render: {} views written to {}", cameras.size(), out_dir.string());
}

void extract_stage(const fs::path& scene_path, const fs::path& cameras_path,
                   const std::optional<fs::path>& masks_dir, const TsdfParams& params,
                   const RenderConfig& render, const fs::path& out) {
  const SplatScene scene = read_scene(scene_path);
  const std::vector<Camera> cameras = read_cameras(cameras_path);
  const std::vector<Mask> masks = masks_dir ? read_masks(*masks_dir, cameras) : std::vector<Mask>{};
  const TriangleMesh mesh = reconstruct(scene, cameras, masks, params, render);
  if (mesh.triangles.empty()) throw PipelineError("extract-mesh: no surface found in the TSDF volume");
  make_parent(out);
  save_mesh_ply(mesh, out);
  spdlog::info("extract-mesh: {} vertices, {} triangles written to {}", mesh.vertices.size(),
               mesh.triangles.size(), out.string());
}

Json eval_stage(const fs::path& mesh_path, const fs::path& gt_path, const EvalOptions& options) {
  if (options.samples == 0) throw InvalidArgument("eval-cd: --samples must be >= 1");
  require_file(mesh_path);
  const TriangleMesh mesh = load_mesh_ply(mesh_path);
  const PointCloud gt = read_cloud(gt_path);
  if (gt.empty()) throw InvalidArgument("eval-cd: " + gt_path.string() + " holds no points");
  const PointCloud samples = sample_mesh(mesh, options.samples, options.seed);
  const CdReport r = chamfer_distance(samples, gt);
  Json j;
  j["cd"] = r.cd;
  j["acc"] = r.acc;
  j["comp"] = r.comp;
  j["samples"] = options.samples;
  j["seed"] = options.seed;
  j["gt_points"] = gt.size();
  return j;
}

namespace {

struct SynthArgs {
  std::string kind = "sphere";
  std::uint64_t seed = 1;
  int size = 48;
  double noise = 0.02;
  std::size_t dense_points = 2000;
  std::size_t sparse_points = 100;
  int iterations = 2000;
  double voxel = 0.02;
  fs::path out;
};

void synth_command(const SynthArgs& a) {
  const ShapeKind kind = parse_shape_kind(a.kind);
  if (a.size < 16) throw InvalidArgument("synth: --size must be >= 16");
  if (!(a.noise >= 0.0)) throw InvalidArgument("synth: --noise must be >= 0");
  const SyntheticScene scene = make_scene(kind, a.size, a.seed);
  make_dirs(a.out / "images");
  make_dirs(a.out / "masks");
  save_cameras(scene.cameras, a.out / "cameras.json");
  for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
    write_ppm(scene.gt_images[v], view_file(a.out / "images", v, ".ppm"));
    write_pgm(scene.masks[v], view_file(a.out / "masks", v, ".pgm"));
  }
  const double r = scene.shape.radius();
  save_ply(scene.gt_surface_points, a.out / "gt.ply");
  save_ply(scene.sparse(a.sparse_points), a.out / "colmap.ply");
  save_ply(scene.dense_noisy(a.noise * r, a.dense_points), a.out / "dust3r.ply");
  save_ply(scene.dense_clean(a.dense_points), a.out / "dense_clean.ply");

  PipelineConfig config;
  config.train.iterations = a.iterations;
  config.tsdf.voxel_size = a.voxel;
  Json j = to_json(config);
  j["synth"] = {{"kind", shape_kind_name(kind)},    {"seed", a.seed},
                {"image_size", a.size},             {"noise", a.noise},
                {"dense_points", a.dense_points},   {"sparse_points", a.sparse_points},
                {"views", scene.cameras.size()}};
  write_json(j, a.out / "config.json");
  spdlog::info("synth: {} scene (seed {}) written to {}", shape_kind_name(kind), a.seed, a.out.string());
}

struct GradCheckArgs {
  std::uint64_t seed = 0;
  int scenes = 1;
  std::string precision = "f64";
  double h = 1e-5;
  double tol = 1e-5;
  GradFixtureOptions fixture;
  LossWeights weights;
};

int grad_check_command(const GradCheckArgs& a) {
  if (a.scenes < 1) throw InvalidArgument("grad-check: --scenes must be >= 1");
  double worst = 0.0;
  for (int k = 0; k < a.scenes; ++k) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(k);
    const GradFixture f = make_grad_fixture(seed, a.fixture);
    Objective objective{f.cameras, f.images, {}, a.weights};
    objective.render.precision = parse_precision(a.precision);
    GradCheckOptions options;
    options.h = a.h;
    const GradCheckResult r = finite_diff_check(f.scene, objective, options);
    Json line;
    line["seed"] = seed;
    line["max_error"] = r.max_error;
    line["worst_param"] = r.worst_param;
    line["checked"] = r.checked;
    line["skipped"] = r.skipped;
    std::cout << line.dump() << '\n';
    worst = std::max(worst, r.max_error);
  }
  if (!(worst < a.tol)) {
    std::cerr << "error[numeric]: gradient check failed: max relative error " << worst
              << " >= tolerance " << a.tol << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

struct PipelineArgs {
  fs::path data;
  fs::path out;
  ConfigFlag config;
  std::optional<fs::path> init_cloud;
  std::optional<int> iterations;
  std::optional<std::string> precision;
  std::optional<double> voxel;
  int log_every = 100;
};

void pipeline_command(const PipelineArgs& a, const std::vector<std::string>& argv) {
  require_dir(a.data);
  PipelineConfig config;
  fs::path config_path;
  if (a.config.path) {
    config_path = *a.config.path;
  } else if (fs::exists(a.data / "config.json")) {
    config_path = a.data / "config.json";
  }
  if (!config_path.empty()) {
    require_file(config_path);
    config = load_pipeline_config(config_path);
  }
  override_with(a.iterations, config.train.iterations);
  override_with(a.voxel, config.tsdf.voxel_size);
  if (a.precision) config.train.render.precision = parse_precision(*a.precision);
  config.train.validate();

  const fs::path cameras = a.data / "cameras.json";
  const fs::path images = a.data / "images";
  const fs::path masks = a.data / "masks";
  const fs::path gt = a.data / "gt.ply";
  const fs::path colmap = a.data / "colmap.ply";
  const fs::path dust3r = a.data / "dust3r.ply";
  make_dirs(a.out);
  const fs::path init_ply = a.out / "init.ply";
  const fs::path scene_ckpt = a.out / "scene.ckpt";
  const fs::path train_dir = a.out / "train";
  const fs::path mesh = a.out / "mesh.ply";
  const fs::path cd_json = a.out / "cd.json";

  Json stages = Json::array();
  auto timed = [&](const char* name, const std::vector<fs::path>& outputs, const auto& body) {
    const auto t0 = Clock::now();
    body();
    Json outs = Json::array();
    for (const auto& p : outputs) {
      if (!fs::exists(p)) throw PipelineError(std::string(name) + ": expected output missing: " + p.string());
      outs.push_back(p.string());
    }
    stages.push_back({{"name", name}, {"seconds", seconds_since(t0)}, {"outputs", outs}});
  };

  fs::path cloud = init_ply;
  if (a.init_cloud) {
    cloud = *a.init_cloud;
    stages.push_back({{"name", "fuse"}, {"skipped", true}, {"reason", "--init-cloud given"}});
  } else {
    timed("fuse", {init_ply}, [&] { fuse_stage(colmap, dust3r, config.fusion, init_ply); });
  }
  timed("init", {scene_ckpt}, [&] { init_stage(cloud, config.init, scene_ckpt); });
  timed("train", {train_dir / "final.ckpt", train_dir / "loss.csv"},
        [&] { train_stage(scene_ckpt, cameras, images, config.train, train_dir, a.log_every); });
  timed("extract-mesh", {mesh}, [&] {
    extract_stage(train_dir / "final.ckpt", cameras, masks, config.tsdf, config.train.render, mesh);
  });
  Json cd;
  timed("eval-cd", {cd_json}, [&] {
    cd = eval_stage(mesh, gt, config.eval);
    write_json(cd, cd_json);
  });
  std::cout << cd.dump() << '\n';

  Json manifest;
  manifest["tool"] = "sparse2dgs";
  manifest["version"] = S2DGS_VERSION;
  manifest["command"] = argv;
  manifest["threads"] = thread_count();
  manifest["seed"] = config.train.seed;
  manifest["config_file"] = config_path.empty() ? Json(nullptr) : Json(config_path.string());
  manifest["config"] = to_json(config);
  manifest["inputs"] = {{"data", a.data.string()},
                        {"cameras", cameras.string()},
                        {"images", images.string()},
                        {"masks", masks.string()},
                        {"gt", gt.string()},
                        {"colmap", a.init_cloud ? Json(nullptr) : Json(colmap.string())},
                        {"dust3r", a.init_cloud ? Json(nullptr) : Json(dust3r.string())},
                        {"init_cloud", cloud.string()}};
  manifest["outputs"] = {{"init_cloud", a.init_cloud ? Json(nullptr) : Json(init_ply.string())},
                         {"scene", scene_ckpt.string()},
                         {"final", (train_dir / "final.ckpt").string()},
                         {"loss", (train_dir / "loss.csv").string()},
                         {"mesh", mesh.string()},
                         {"cd", cd_json.string()}};
  manifest["stages"] = stages;
  manifest["result"] = cd;
  write_json(manifest, a.out / "manifest.json");
}

int report(const char* kind, const std::string& message, int code) {
  std::string line = message;
  for (char& c : line) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "error[" << kind << "]: " << line << '\n';
  return code;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
    case ErrorKind::kParse:
    case ErrorKind::kInvalidArgument:
      return kExitUsage;
    case ErrorKind::kNumeric:
    case ErrorKind::kPipeline:
      return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Sparse-view surface reconstruction with 2D Gaussian splats", "sparse2dgs"};
  app.set_version_flag("--version", S2DGS_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  int threads = 0;
  std::string log_level = "info";
  app.add_option("--threads", threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--log-level", log_level, "Log level on stderr")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Fuse a COLMAP cloud and a DUSt3R cloud into an initialization");
  fs::path fuse_colmap, fuse_dust3r, fuse_out;
  ConfigFlag fuse_config;
  std::optional<double> fuse_voxel, fuse_std;
  std::optional<int> fuse_k, fuse_iters;
  fuse->add_option("--colmap", fuse_colmap, "COLMAP point cloud (PLY)")->required();
  fuse->add_option("--dust3r", fuse_dust3r, "DUSt3R point cloud (PLY or .s2pm point map)")->required();
  fuse->add_option("-o,--output", fuse_out, "Fused cloud (PLY)")->required();
  fuse->add_option("--voxel", fuse_voxel, "Voxel size for downsampling (default 0.005)");
  fuse->add_option("--outlier-k", fuse_k, "Neighbors for outlier removal (default 20)");
  fuse->add_option("--outlier-std", fuse_std, "Std-ratio threshold for outlier removal (default 2.0)");
  fuse->add_option("--icp-iters", fuse_iters, "Maximum ICP iterations (default 50)");
  add_config_flag(fuse, fuse_config);

  // init
  auto* init = app.add_subcommand("init", "Create one splat per point of a cloud");
  fs::path init_cloud, init_out;
  ConfigFlag init_config;
  std::optional<int> init_k;
  std::optional<double> init_opacity;
  std::optional<std::uint64_t> init_seed;
  init->add_option("--cloud", init_cloud, "Input point cloud (PLY)")->required();
  init->add_option("-o,--output", init_out, "Scene checkpoint")->required();
  init->add_option("--knn", init_k, "Neighbors for the initial scale (default 3)");
  init->add_option("--opacity", init_opacity, "Initial opacity (default 0.1)");
  init->add_option("--seed", init_seed, "Seed for orientations of points without normals (default 0)");
  add_config_flag(init, init_config);

  // train
  auto* trn = app.add_subcommand("train", "Optimize a scene against the input views");
  fs::path train_scene, train_cameras, train_images, train_out;
  std::optional<fs::path> train_config;
  std::optional<int> train_iters, train_snap;
  std::optional<double> train_alpha, train_beta, train_lambda;
  std::optional<std::string> train_precision;
  int train_log_every = 100;
  trn->add_option("--scene", train_scene, "Initial scene checkpoint")->required();
  trn->add_option("--cameras", train_cameras, "Camera file (JSON)")->required();
  trn->add_option("--images", train_images, "Directory of input views 000.ppm, 001.ppm, ...")->required();
  trn->add_option("-o,--output", train_out, "Output directory (final.ckpt, loss.csv, snapshots/)")
      ->required();
  trn->add_option("--config", train_config, "Train config JSON, or a pipeline config with a train section");
  trn->add_option("--iterations", train_iters, "Iterations (default 10000)");
  trn->add_option("--alpha", train_alpha, "Depth distortion weight (default 1000)");
  trn->add_option("--beta", train_beta, "Normal consistency weight (default 0.05)");
  trn->add_option("--lambda", train_lambda, "D-SSIM share of the color loss (default 0.2)");
  trn->add_option("--snapshot-interval", train_snap, "Checkpoint every N iterations, 0 = never (default 0)");
  trn->add_option("--log-every", train_log_every, "Log the loss every N iterations, 0 = never");
  add_precision_flag(trn, train_precision);

  // render
  auto* rnd = app.add_subcommand("render", "Render color, depth and accumulated weight for each camera");
  fs::path render_scene, render_cameras, render_out;
  std::optional<std::string> render_precision;
  rnd->add_option("--scene", render_scene, "Scene checkpoint")->required();
  rnd->add_option("--cameras", render_cameras, "Camera file (JSON)")->required();
  rnd->add_option("-o,--out", render_out, "Output directory (NNN.ppm, NNN_depth.pfm, NNN_acc.pfm)")
      ->required();
  add_precision_flag(rnd, render_precision);

  // extract-mesh
  auto* ext = app.add_subcommand("extract-mesh", "Fuse masked rendered depth into a TSDF and mesh it");
  fs::path ext_scene, ext_cameras, ext_out;
  std::optional<fs::path> ext_masks;
  ConfigFlag ext_config;
  std::optional<double> ext_voxel, ext_trunc, ext_padding;
  std::optional<std::string> ext_precision;
  ext->add_option("--scene", ext_scene, "Scene checkpoint")->required();
  ext->add_option("--cameras", ext_cameras, "Camera file (JSON)")->required();
  ext->add_option("--masks", ext_masks, "Directory of masks 000.pgm, 001.pgm, ... (optional)");
  ext->add_option("-o,--output", ext_out, "Mesh (ASCII PLY)")->required();
  ext->add_option("--voxel", ext_voxel, "TSDF voxel size (default 0.01)");
  ext->add_option("--trunc", ext_trunc, "Truncation distance, 0 = 4 voxels (default 0)");
  ext->add_option("--padding", ext_padding, "Bounds padding per side, fraction of extent (default 0.05)");
  add_precision_flag(ext, ext_precision);
  add_config_flag(ext, ext_config);

  // eval-cd
  auto* evl = app.add_subcommand("eval-cd", "Chamfer distance between a mesh and ground-truth points");
  fs::path eval_mesh, eval_gt;
  std::optional<fs::path> eval_out;
  ConfigFlag eval_config;
  std::optional<std::size_t> eval_samples;
  std::optional<std::uint64_t> eval_seed;
  evl->add_option("--mesh", eval_mesh, "Mesh (PLY with faces)")->required();
  evl->add_option("--gt", eval_gt, "Ground-truth points (PLY)")->required();
  evl->add_option("--samples", eval_samples, "Points sampled on the mesh (default 100000)");
  evl->add_option("--seed", eval_seed, "Sampling seed (default 0)");
  evl->add_option("-o,--output", eval_out, "Also write the report to this JSON file");
  add_config_flag(evl, eval_config);

  // synth
  auto* syn = app.add_subcommand("synth", "Write a synthetic three-view scene");
  SynthArgs synth;
  syn->add_option("--kind", synth.kind, "Shape")->check(CLI::IsMember({"sphere", "plane", "two_spheres"}));
  syn->add_option("--seed", synth.seed, "Scene seed");
  syn->add_option("--size", synth.size, "Image width and height in pixels");
  syn->add_option("--noise", synth.noise, "Noise of dust3r.ply as a fraction of the object radius");
  syn->add_option("--dense-points", synth.dense_points, "Points in dust3r.ply and dense_clean.ply");
  syn->add_option("--sparse-points", synth.sparse_points, "Points in colmap.ply");
  syn->add_option("--iterations", synth.iterations, "Training iterations written to config.json");
  syn->add_option("--voxel", synth.voxel, "TSDF voxel size written to config.json");
  syn->add_option("-o,--output", synth.out, "Output directory")->required();

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "Compare analytic gradients with central differences");
  GradCheckArgs grad;
  gc->add_option("--seed", grad.seed, "First fixture seed");
  gc->add_option("--scenes", grad.scenes, "Number of fixtures (seeds seed, seed+1, ...)");
  gc->add_option("--precision", grad.precision, "Render precision")->check(CLI::IsMember({"f32", "f64"}));
  gc->add_option("--splats", grad.fixture.splats, "Splats per fixture");
  gc->add_option("--size", grad.fixture.image_size, "Image size in pixels");
  gc->add_option("--views", grad.fixture.views, "Views per fixture");
  gc->add_option("--max-tilt", grad.fixture.max_tilt, "Largest splat tilt away from the camera (radians)");
  gc->add_option("--step", grad.h, "Finite-difference step h");
  gc->add_option("--tol", grad.tol, "Maximum relative error");
  gc->add_option("--alpha", grad.weights.alpha, "Depth distortion weight");
  gc->add_option("--beta", grad.weights.beta, "Normal consistency weight");

  // pipeline
  auto* pip = app.add_subcommand("pipeline", "fuse -> init -> train -> extract-mesh -> eval-cd");
  PipelineArgs pipe;
  pip->add_option("--data", pipe.data, "Scene directory as written by `synth`")->required();
  pip->add_option("-o,--output", pipe.out, "Output directory")->required();
  add_config_flag(pip, pipe.config);
  pip->add_option("--init-cloud", pipe.init_cloud, "Skip fusion and initialize from this cloud");
  pip->add_option("--iterations", pipe.iterations, "Training iterations (overrides the config)");
  pip->add_option("--voxel", pipe.voxel, "TSDF voxel size (overrides the config)");
  pip->add_option("--log-every", pipe.log_every, "Log the loss every N iterations, 0 = never");
  add_precision_flag(pip, pipe.precision);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), kExitUsage);
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    set_thread_count(threads);

    if (*fuse) {
      PipelineConfig c = fuse_config.load();
      override_with(fuse_voxel, c.fusion.voxel_size);
      override_with(fuse_k, c.fusion.outlier_k);
      override_with(fuse_std, c.fusion.outlier_std_ratio);
      override_with(fuse_iters, c.fusion.icp_max_iters);
      fuse_stage(fuse_colmap, fuse_dust3r, c.fusion, fuse_out);
    } else if (*init) {
      PipelineConfig c = init_config.load();
      override_with(init_k, c.init.knn_k);
      override_with(init_opacity, c.init.opacity);
      override_with(init_seed, c.init.seed);
      init_stage(init_cloud, c.init, init_out);
    } else if (*trn) {
      TrainConfig c;
      if (train_config) {
        require_file(*train_config);
        c = load_train_config(*train_config);
      }
      override_with(train_iters, c.iterations);
      override_with(train_alpha, c.weights.alpha);
      override_with(train_beta, c.weights.beta);
      override_with(train_lambda, c.weights.lambda);
      override_with(train_snap, c.snapshot_interval);
      if (train_precision) c.render.precision = parse_precision(*train_precision);
      train_stage(train_scene, train_cameras, train_images, c, train_out, train_log_every);
    } else if (*rnd) {
      RenderConfig r;
      if (render_precision) r.precision = parse_precision(*render_precision);
      render_stage(render_scene, render_cameras, r, render_out);
    } else if (*ext) {
      PipelineConfig c = ext_config.load();
      override_with(ext_voxel, c.tsdf.voxel_size);
      override_with(ext_trunc, c.tsdf.trunc);
      override_with(ext_padding, c.tsdf.padding);
      if (ext_precision) c.train.render.precision = parse_precision(*ext_precision);
      extract_stage(ext_scene, ext_cameras, ext_masks, c.tsdf, c.train.render, ext_out);
    } else if (*evl) {
      PipelineConfig c = eval_config.load();
      override_with(eval_samples, c.eval.samples);
      override_with(eval_seed, c.eval.seed);
      const Json j = eval_stage(eval_mesh, eval_gt, c.eval);
      if (eval_out) {
        make_parent(*eval_out);
        write_json(j, *eval_out);
      }
      std::cout << j.dump() << '\n';
    } else if (*syn) {
      synth_command(synth);
    } else if (*gc) {
      return grad_check_command(grad);
    } else if (*pip) {
      pipeline_command(pipe, std::vector<std::string>(argv, argv + argc));
    }
  } catch (const Error& e) {
    return report(error_kind_name(e.kind()), e.what(), exit_code_for(e.kind()));
  } catch (const nlohmann::json::exception& e) {
    return report("parse", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return report("internal", e.what(), kExitFailure);
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("sparse2dgs");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace s2dgs::cli

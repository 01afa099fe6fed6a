// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sparse2dgs/error.hpp"

namespace s2dgs::cli {
namespace {

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError("config: '" + path_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer()) throw ParseError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ParseError("");
      }
      out = it->template get<T>();
    } catch (const std::exception&) {
      throw ParseError("config: '" + name(key) + "' has the wrong type");
    }
  }

  void get(const char* key, Vec3& out) {
    known_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_array() || it->size() != 3 || !(*it)[0].is_number() || !(*it)[1].is_number() ||
        !(*it)[2].is_number()) {
      throw ParseError("config: '" + name(key) + "' must be an array of 3 numbers");
    }
    out = Vec3((*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>());
  }

  void get(const char* key, Precision& out) {
    std::string s = precision_name(out);
    get(key, s);
    try {
      out = parse_precision(s);
    } catch (const Error&) {
      throw ParseError("config: '" + name(key) + "' must be \"f32\" or \"f64\"");
    }
  }

  // Nested object, if present.
  const Json* child(const char* key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void ignore(const char* key) { known_.insert(key); }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!known_.count(it.key())) throw ParseError("config: unknown key '" + name(it.key()) + "'");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> known_;
};

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

void read_weights(const Json& j, const std::string& path, LossWeights& w) {
  Section s(j, path);
  s.get("alpha", w.alpha);
  s.get("beta", w.beta);
  s.get("lambda", w.lambda);
  s.get("dssim_window", w.dssim_window);
  s.get("dssim_sigma", w.dssim_sigma);
  s.finish();
}

void read_rates(const Json& j, const std::string& path, LearningRates& r) {
  Section s(j, path);
  s.get("center", r.center);
  s.get("center_final", r.center_final);
  s.get("rotation", r.rotation);
  s.get("scale", r.scale);
  s.get("opacity", r.opacity);
  s.get("color", r.color);
  s.finish();
}

void read_adam(const Json& j, const std::string& path, AdamParams& a) {
  Section s(j, path);
  s.get("beta1", a.beta1);
  s.get("beta2", a.beta2);
  s.get("eps", a.eps);
  s.finish();
}

void read_render(const Json& j, const std::string& path, RenderConfig& r) {
  Section s(j, path);
  s.get("epsilon", r.epsilon);
  s.get("transmittance_cutoff", r.transmittance_cutoff);
  s.get("max_contribs_per_ray", r.max_contribs_per_ray);
  s.get("gaussian_cutoff", r.gaussian_cutoff);
  s.get("precision", r.precision);
  s.get("culling", r.culling);
  s.finish();
}

void read_train(const Json& j, const std::string& path, TrainConfig& c) {
  Section s(j, path);
  s.get("iterations", c.iterations);
  s.get("seed", c.seed);
  s.get("snapshot_interval", c.snapshot_interval);
  s.get("distortion_warmup", c.distortion_warmup);
  s.get("normal_warmup", c.normal_warmup);
  if (const Json* w = s.child("weights")) read_weights(*w, s.name("weights"), c.weights);
  if (const Json* r = s.child("rates")) read_rates(*r, s.name("rates"), c.rates);
  if (const Json* a = s.child("adam")) read_adam(*a, s.name("adam"), c.adam);
  if (const Json* r = s.child("render")) read_render(*r, s.name("render"), c.render);
  s.finish();
}

}  // namespace

Json to_json(const TrainConfig& c) {
  Json j;
  j["iterations"] = c.iterations;
  j["seed"] = c.seed;
  j["snapshot_interval"] = c.snapshot_interval;
  j["distortion_warmup"] = c.distortion_warmup;
  j["normal_warmup"] = c.normal_warmup;
  j["weights"] = {{"alpha", c.weights.alpha},
                  {"beta", c.weights.beta},
                  {"lambda", c.weights.lambda},
                  {"dssim_window", c.weights.dssim_window},
                  {"dssim_sigma", c.weights.dssim_sigma}};
  j["rates"] = {{"center", c.rates.center},     {"center_final", c.rates.center_final},
                {"rotation", c.rates.rotation}, {"scale", c.rates.scale},
                {"opacity", c.rates.opacity},   {"color", c.rates.color}};
  j["adam"] = {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}};
  j["render"] = {{"epsilon", c.render.epsilon},
                 {"transmittance_cutoff", c.render.transmittance_cutoff},
                 {"max_contribs_per_ray", c.render.max_contribs_per_ray},
                 {"gaussian_cutoff", c.render.gaussian_cutoff},
                 {"precision", precision_name(c.render.precision)},
                 {"culling", c.render.culling}};
  return j;
}

Json to_json(const PipelineConfig& c) {
  Json j;
  j["fusion"] = {{"voxel_size", c.fusion.voxel_size},
                 {"outlier_k", c.fusion.outlier_k},
                 {"outlier_std_ratio", c.fusion.outlier_std_ratio},
                 {"icp_max_iters", c.fusion.icp_max_iters},
                 {"icp_tolerance", c.fusion.icp_tolerance},
                 {"icp_max_corr_dist", c.fusion.icp_max_corr_dist}};
  j["init"] = {{"knn_k", c.init.knn_k},
               {"opacity", c.init.opacity},
               {"seed", c.init.seed},
               {"background", vec_json(c.init.background)}};
  j["train"] = to_json(c.train);
  j["tsdf"] = {{"voxel_size", c.tsdf.voxel_size}, {"trunc", c.tsdf.trunc}, {"padding", c.tsdf.padding}};
  j["eval"] = {{"samples", c.eval.samples}, {"seed", c.eval.seed}};
  return j;
}

void from_json(const Json& j, TrainConfig& c) {
  read_train(j, "", c);
  c.validate();
}

void from_json(const Json& j, PipelineConfig& c) {
  Section s(j, "");
  s.ignore("synth");  // scene description written by `synth`, informational only
  if (const Json* f = s.child("fusion")) {
    Section t(*f, "fusion");
    t.get("voxel_size", c.fusion.voxel_size);
    t.get("outlier_k", c.fusion.outlier_k);
    t.get("outlier_std_ratio", c.fusion.outlier_std_ratio);
    t.get("icp_max_iters", c.fusion.icp_max_iters);
    t.get("icp_tolerance", c.fusion.icp_tolerance);
    t.get("icp_max_corr_dist", c.fusion.icp_max_corr_dist);
    t.finish();
  }
  if (const Json* i = s.child("init")) {
    Section t(*i, "init");
    t.get("knn_k", c.init.knn_k);
    t.get("opacity", c.init.opacity);
    t.get("seed", c.init.seed);
    t.get("background", c.init.background);
    t.finish();
  }
  if (const Json* t = s.child("train")) read_train(*t, "train", c.train);
  if (const Json* v = s.child("tsdf")) {
    Section t(*v, "tsdf");
    t.get("voxel_size", c.tsdf.voxel_size);
    t.get("trunc", c.tsdf.trunc);
    t.get("padding", c.tsdf.padding);
    t.finish();
  }
  if (const Json* e = s.child("eval")) {
    Section t(*e, "eval");
    t.get("samples", c.eval.samples);
    t.get("seed", c.eval.seed);
    t.finish();
  }
  s.finish();
  c.fusion.validate();
  c.train.validate();
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  const Json j = read_json(path);
  TrainConfig c;
  if (j.is_object() && (j.contains("train") || j.contains("fusion") || j.contains("tsdf"))) {
    PipelineConfig p;
    from_json(j, p);
    return p.train;
  }
  from_json(j, c);
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  PipelineConfig c;
  from_json(read_json(path), c);
  return c;
}

}  // namespace s2dgs::cli

// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/camera.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sparse2dgs/error.hpp"

namespace s2dgs {

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("camera: fx and fy must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("camera: width and height must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw InvalidArgument("camera: non-finite principal point");
  }
}

Vec3 Camera::center() const {
  const Mat3& r = world_to_camera.rotation();
  return -(r.transpose() * world_to_camera.translation());
}

Vec3 Camera::optical_axis() const {
  return world_to_camera.rotation().row(2).transpose();
}

Vec2 Camera::project(const Vec3& p) const {
  return Vec2(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
}

Ray pixel_to_ray(const Camera& camera, double px, double py) {
  const Vec3 dir_cam((px + 0.5 - camera.cx) / camera.fx,
                     (py + 0.5 - camera.cy) / camera.fy, 1.0);
  const Mat3& r = camera.world_to_camera.rotation();
  return Ray{camera.center(), (r.transpose() * dir_cam).normalized()};
}

std::optional<Vec2> project_to_pixel(const Camera& camera, const Vec3& world) {
  const Vec3 p = camera.to_camera(world);
  if (!(p.z() > 0.0)) return std::nullopt;
  return camera.project(p) - Vec2(0.5, 0.5);
}

RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-12) right = forward.unitOrthogonal();
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return RigidTransform(r, -(r * eye));
}

namespace {

using nlohmann::json;

Camera camera_from_json(const json& j, std::size_t index) {
  const auto where = "camera " + std::to_string(index) + ": ";
  for (const char* key : {"fx", "fy", "cx", "cy", "width", "height", "world_to_camera"}) {
    if (!j.contains(key)) throw ParseError(where + "missing field '" + key + "'");
  }
  Camera cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  const json& m = j.at("world_to_camera");
  Mat4 mat;
  if (m.is_array() && m.size() == 4 && m[0].is_array()) {
    for (int r = 0; r < 4; ++r) {
      if (m[r].size() != 4) throw ParseError(where + "world_to_camera must be 4x4");
      for (int c = 0; c < 4; ++c) mat(r, c) = m[r][c].get<double>();
    }
  } else if (m.is_array() && m.size() == 16) {
    for (int i = 0; i < 16; ++i) mat(i / 4, i % 4) = m[i].get<double>();
  } else {
    throw ParseError(where + "world_to_camera must be 4x4 (nested or flat row-major)");
  }
  try {
    cam.world_to_camera = RigidTransform::from_matrix(mat);
    cam.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(where + e.what());
  }
  return cam;
}

}  // namespace

std::vector<Camera> load_cameras(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open camera file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("camera file " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw ParseError("camera file " + path.string() + ": expected an array");
  std::vector<Camera> cams;
  try {
    for (std::size_t i = 0; i < doc.size(); ++i) cams.push_back(camera_from_json(doc[i], i));
  } catch (const json::exception& e) {
    throw ParseError("camera file " + path.string() + ": " + e.what());
  }
  return cams;
}

void save_cameras(const std::vector<Camera>& cameras, const std::filesystem::path& path) {
  json doc = json::array();
  for (const Camera& c : cameras) {
    const Mat4 m = c.world_to_camera.matrix();
    json rows = json::array();
    for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    doc.push_back({{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
                   {"width", c.width}, {"height", c.height}, {"world_to_camera", rows}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write camera file " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace s2dgs

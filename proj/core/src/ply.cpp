// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/ply.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "sparse2dgs/error.hpp"

namespace s2dgs {
namespace {

static_assert(std::endian::native == std::endian::little);

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<ScalarType> parse_type(const std::string& s) {
  if (s == "char" || s == "int8") return ScalarType::kInt8;
  if (s == "uchar" || s == "uint8") return ScalarType::kUInt8;
  if (s == "short" || s == "int16") return ScalarType::kInt16;
  if (s == "ushort" || s == "uint16") return ScalarType::kUInt16;
  if (s == "int" || s == "int32") return ScalarType::kInt32;
  if (s == "uint" || s == "uint32") return ScalarType::kUInt32;
  if (s == "float" || s == "float32") return ScalarType::kFloat32;
  if (s == "double" || s == "float64") return ScalarType::kFloat64;
  return std::nullopt;
}

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUInt8: return 1;
    case ScalarType::kInt16:
    case ScalarType::kUInt16: return 2;
    case ScalarType::kInt32:
    case ScalarType::kUInt32:
    case ScalarType::kFloat32: return 4;
    case ScalarType::kFloat64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  std::string type_name;
  std::optional<ScalarType> type;  // empty: unsupported (ASCII only)
  bool is_list = false;
  ScalarType count_type = ScalarType::kUInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
};

struct Header {
  bool binary = false;
  std::vector<Element> elements;
};

[[noreturn]] void header_error(const std::filesystem::path& path, int line_no,
                               const std::string& line, const std::string& why) {
  throw ParseError("ply " + path.string() + ": line " + std::to_string(line_no) + " '" + line +
                   "': " + why);
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  Header header;
  std::string line;
  int line_no = 0;
  bool have_format = false;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != "ply") header_error(path, 1, line, "missing 'ply' magic");
  while (true) {
    if (!next_line()) header_error(path, line_no, "", "header ended without end_header");
    std::istringstream ss(line);
    std::string keyword;
    ss >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string fmt, version;
      ss >> fmt >> version;
      if (fmt == "ascii") {
        header.binary = false;
      } else if (fmt == "binary_little_endian") {
        header.binary = true;
      } else {
        header_error(path, line_no, line, "unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      ss >> e.name >> count;
      if (e.name.empty() || ss.fail() || count < 0) {
        header_error(path, line_no, line, "expected 'element <name> <count>'");
      }
      e.count = static_cast<std::size_t>(count);
      header.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (header.elements.empty()) header_error(path, line_no, line, "property before any element");
      Property p;
      std::string type;
      ss >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ss >> count_type >> item_type >> p.name;
        const auto ct = parse_type(count_type);
        if (!ct || *ct == ScalarType::kFloat32 || *ct == ScalarType::kFloat64) {
          header_error(path, line_no, line, "bad list count type '" + count_type + "'");
        }
        p.is_list = true;
        p.count_type = *ct;
        p.type_name = item_type;
        p.type = parse_type(item_type);
      } else {
        ss >> p.name;
        p.type_name = type;
        p.type = parse_type(type);
      }
      if (p.name.empty() || type.empty()) header_error(path, line_no, line, "expected 'property <type> <name>'");
      if (!p.type && header.binary) {
        header_error(path, line_no, line, "unknown property type '" + p.type_name + "' in binary file");
      }
      header.elements.back().props.push_back(std::move(p));
    } else {
      header_error(path, line_no, line, "unknown header keyword '" + keyword + "'");
    }
  }
  if (!have_format) throw ParseError("ply " + path.string() + ": missing format line");
  return header;
}

// Streams scalar values out of the body in either encoding.
class BodyReader {
 public:
  BodyReader(std::istream& in, bool binary, const std::filesystem::path& path)
      : in_(in), binary_(binary), path_(path) {}

  double read(ScalarType t) {
    if (!binary_) return parse_token(next_token());
    unsigned char buf[8];
    const std::size_t n = type_size(t);
    in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) fail("unexpected end of binary data");
    switch (t) {
      case ScalarType::kInt8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
      case ScalarType::kUInt8: return static_cast<double>(buf[0]);
      case ScalarType::kInt16: return static_cast<double>(load<std::int16_t>(buf));
      case ScalarType::kUInt16: return static_cast<double>(load<std::uint16_t>(buf));
      case ScalarType::kInt32: return static_cast<double>(load<std::int32_t>(buf));
      case ScalarType::kUInt32: return static_cast<double>(load<std::uint32_t>(buf));
      case ScalarType::kFloat32: return static_cast<double>(load<float>(buf));
      case ScalarType::kFloat64: return load<double>(buf);
    }
    return 0.0;
  }

  // ASCII only: consume one value of an unsupported type.
  void skip_token() { next_token(); }

 private:
  template <typename T>
  static T load(const unsigned char* buf) {
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::string next_token() {
    std::string tok;
    if (!(in_ >> tok)) fail("unexpected end of ASCII data");
    return tok;
  }

  double parse_token(const std::string& tok) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      // from_chars rejects a leading '+', accept it for robustness
      try {
        std::size_t used = 0;
        v = std::stod(tok, &used);
        if (used == tok.size()) return v;
      } catch (const std::exception&) {
      }
      fail("bad numeric token '" + tok + "'");
    }
    return v;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("ply " + path_.string() + ": " + why);
  }

  std::istream& in_;
  bool binary_;
  const std::filesystem::path& path_;
};

struct ElementData {
  // scalar[p][i] for scalar property p of instance i (empty for lists or
  // unsupported properties)
  std::vector<std::vector<double>> scalar;
  std::vector<std::vector<std::vector<double>>> lists;
};

ElementData read_element(BodyReader& reader, const Element& e, bool binary) {
  ElementData d;
  d.scalar.resize(e.props.size());
  d.lists.resize(e.props.size());
  for (std::size_t p = 0; p < e.props.size(); ++p) {
    if (!e.props[p].is_list && e.props[p].type) d.scalar[p].resize(e.count);
    if (e.props[p].is_list) d.lists[p].resize(e.count);
  }
  for (std::size_t i = 0; i < e.count; ++i) {
    for (std::size_t p = 0; p < e.props.size(); ++p) {
      const Property& prop = e.props[p];
      if (prop.is_list) {
        const double n = reader.read(prop.count_type);
        if (n < 0 || n != std::floor(n)) {
          throw ParseError("ply: bad list length in element '" + e.name + "'");
        }
        auto& list = d.lists[p][i];
        list.resize(static_cast<std::size_t>(n));
        for (auto& v : list) {
          if (prop.type) {
            v = reader.read(*prop.type);
          } else {
            reader.skip_token();
          }
        }
      } else if (prop.type) {
        d.scalar[p][i] = reader.read(*prop.type);
      } else {
        (void)binary;
        reader.skip_token();
      }
    }
  }
  return d;
}

std::optional<std::size_t> find_prop(const Element& e, const std::string& name) {
  for (std::size_t i = 0; i < e.props.size(); ++i) {
    if (e.props[i].name == name && !e.props[i].is_list) return i;
  }
  return std::nullopt;
}

struct ParsedPly {
  PointCloud cloud;
  std::vector<std::vector<double>> faces;
  bool has_faces = false;
};

ParsedPly parse_ply(const std::filesystem::path& path, bool want_faces) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PLY file " + path.string());
  const Header header = read_header(in, path);
  BodyReader reader(in, header.binary, path);
  ParsedPly out;
  bool have_vertex = false;
  for (const Element& e : header.elements) {
    ElementData data = read_element(reader, e, header.binary);
    if (e.name == "vertex") {
      have_vertex = true;
      const auto ix = find_prop(e, "x");
      const auto iy = find_prop(e, "y");
      const auto iz = find_prop(e, "z");
      if (!ix || !iy || !iz || !e.props[*ix].type || !e.props[*iy].type || !e.props[*iz].type) {
        throw ParseError("ply " + path.string() + ": vertex element lacks numeric x, y, z");
      }
      std::vector<bool> used(e.props.size(), false);
      used[*ix] = used[*iy] = used[*iz] = true;
      PointCloud& c = out.cloud;
      c.points.resize(e.count);
      for (std::size_t i = 0; i < e.count; ++i) {
        c.points[i] = Vec3(data.scalar[*ix][i], data.scalar[*iy][i], data.scalar[*iz][i]);
      }
      const auto inx = find_prop(e, "nx");
      const auto iny = find_prop(e, "ny");
      const auto inz = find_prop(e, "nz");
      if (inx && iny && inz && e.props[*inx].type && e.props[*iny].type && e.props[*inz].type) {
        used[*inx] = used[*iny] = used[*inz] = true;
        c.normals.resize(e.count);
        bool degenerate = false;
        for (std::size_t i = 0; i < e.count; ++i) {
          Vec3 n(data.scalar[*inx][i], data.scalar[*iny][i], data.scalar[*inz][i]);
          const double len = n.norm();
          if (!(len > 1e-12) || !std::isfinite(len)) {
            degenerate = true;
            break;
          }
          c.normals[i] = n / len;
        }
        if (degenerate) {
          spdlog::warn("ply {}: zero or non-finite normals present, dropping normals", path.string());
          c.normals.clear();
        }
      }
      const auto ir = find_prop(e, "red");
      const auto ig = find_prop(e, "green");
      const auto ib = find_prop(e, "blue");
      if (ir && ig && ib) {
        const auto scale_for = [&](std::size_t p) -> std::optional<double> {
          const auto& t = e.props[p].type;
          if (!t) return std::nullopt;
          if (*t == ScalarType::kUInt8) return 1.0 / 255.0;
          if (*t == ScalarType::kFloat32 || *t == ScalarType::kFloat64) return 1.0;
          return std::nullopt;
        };
        const auto sr = scale_for(*ir);
        const auto sg = scale_for(*ig);
        const auto sb = scale_for(*ib);
        if (sr && sg && sb) {
          used[*ir] = used[*ig] = used[*ib] = true;
          c.colors.resize(e.count);
          for (std::size_t i = 0; i < e.count; ++i) {
            c.colors[i] = Vec3(data.scalar[*ir][i] * *sr, data.scalar[*ig][i] * *sg,
                               data.scalar[*ib][i] * *sb);
          }
        } else {
          spdlog::warn("ply {}: color properties of type '{}' are not supported, skipping colors",
                       path.string(), e.props[*ir].type_name);
        }
      }
      for (std::size_t p = 0; p < e.props.size(); ++p) {
        if (used[p]) continue;
        const Property& prop = e.props[p];
        if (!prop.type || prop.is_list) {
          spdlog::warn("ply {}: skipping unsupported vertex property '{}' ({}{})", path.string(),
                       prop.name, prop.is_list ? "list " : "", prop.type_name);
        }
      }
    } else if (e.name == "face" && want_faces) {
      std::optional<std::size_t> li;
      for (std::size_t p = 0; p < e.props.size(); ++p) {
        if (e.props[p].is_list &&
            (e.props[p].name == "vertex_indices" || e.props[p].name == "vertex_index")) {
          li = p;
        }
      }
      if (!li || !e.props[*li].type) {
        throw ParseError("ply " + path.string() + ": face element lacks a vertex_indices list");
      }
      out.faces = std::move(data.lists[*li]);
      out.has_faces = true;
    }
  }
  if (!have_vertex) throw ParseError("ply " + path.string() + ": no vertex element");
  for (const Vec3& p : out.cloud.points) {
    if (!is_finite(p)) throw ParseError("ply " + path.string() + ": non-finite vertex coordinate");
  }
  return out;
}

void write_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

template <typename T>
void put(std::string& bytes, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  bytes.append(buf, sizeof(T));
}

std::uint8_t color_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

PointCloud load_ply(const std::filesystem::path& path) {
  return parse_ply(path, false).cloud;
}

TriangleMesh load_mesh_ply(const std::filesystem::path& path) {
  ParsedPly parsed = parse_ply(path, true);
  TriangleMesh mesh;
  mesh.vertices = std::move(parsed.cloud.points);
  for (const auto& face : parsed.faces) {
    if (face.size() < 3) continue;
    for (std::size_t k = 1; k + 1 < face.size(); ++k) {
      std::array<std::uint32_t, 3> tri{};
      const double idx[3] = {face[0], face[k], face[k + 1]};
      for (int j = 0; j < 3; ++j) {
        if (idx[j] < 0 || idx[j] >= static_cast<double>(mesh.vertices.size())) {
          throw ParseError("ply " + path.string() + ": face index out of range");
        }
        tri[j] = static_cast<std::uint32_t>(idx[j]);
      }
      mesh.triangles.push_back(tri);
    }
  }
  return mesh;
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PLY file " + path.string());
  const bool binary = format == PlyFormat::kBinaryLittleEndian;
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) out << "property double nx\nproperty double ny\nproperty double nz\n";
  if (cloud.has_colors()) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  if (binary) {
    std::string bytes;
    bytes.reserve(cloud.size() * 51);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      for (int k = 0; k < 3; ++k) put(bytes, cloud.points[i][k]);
      if (cloud.has_normals()) {
        for (int k = 0; k < 3; ++k) put(bytes, cloud.normals[i][k]);
      }
      if (cloud.has_colors()) {
        for (int k = 0; k < 3; ++k) put(bytes, color_byte(cloud.colors[i][k]));
      }
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return;
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (k) out << ' ';
      write_double(out, cloud.points[i][k]);
    }
    if (cloud.has_normals()) {
      for (int k = 0; k < 3; ++k) {
        out << ' ';
        write_double(out, cloud.normals[i][k]);
      }
    }
    if (cloud.has_colors()) {
      for (int k = 0; k < 3; ++k) out << ' ' << static_cast<int>(color_byte(cloud.colors[i][k]));
    }
    out << '\n';
  }
}

void save_mesh_ply(const TriangleMesh& mesh, const std::filesystem::path& path) {
  mesh.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PLY file " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.triangles.size() << "\nproperty list uchar uint vertex_indices\n"
      << "end_header\n";
  for (const Vec3& v : mesh.vertices) {
    write_double(out, v.x());
    out << ' ';
    write_double(out, v.y());
    out << ' ';
    write_double(out, v.z());
    out << '\n';
  }
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace s2dgs

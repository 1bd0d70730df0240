#pragma once

// File formats: binary PGM silhouettes, ASCII OBJ meshes, ASCII XYZ clouds,
// VOXG1 voxel grids and the JSON documents for graphs, pose sets and reports.

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "mvrecon/carve.hpp"
#include "mvrecon/error.hpp"
#include "mvrecon/eval.hpp"
#include "mvrecon/mesh.hpp"
#include "mvrecon/posegraph.hpp"
#include "mvrecon/raster.hpp"

namespace mvrecon::io {

using nlohmann::json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

/// Shortest-round-trip-safe decimal text for a double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- PGM

inline std::string encode_pgm(const Silhouette& s) {
  std::string out = "P5\n" + std::to_string(s.width) + " " + std::to_string(s.height) + "\n255\n";
  out.reserve(out.size() + s.mask.size());
  for (auto v : s.mask) out.push_back(static_cast<char>(v ? 255 : 0));
  return out;
}

/// Binary P5 with maxval <= 255; values >= 128 are foreground.
inline Silhouette decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "P5") throw Error(ErrorCode::kParseError, "not a binary PGM (P5)");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParseError, "malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::kParseError, "unsupported PGM dimensions or maxval");
  }
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() < pos + n) throw Error(ErrorCode::kParseError, "truncated PGM pixel data");
  Silhouette s(width, height);
  for (std::size_t k = 0; k < n; ++k) {
    s.mask[k] = static_cast<unsigned char>(bytes[pos + k]) >= 128 ? 1 : 0;
  }
  return s;
}

inline void write_pgm(const std::filesystem::path& path, const Silhouette& s) {
  write_file(path, encode_pgm(s));
}
inline Silhouette read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

// ---------------------------------------------------------------- OBJ

/// Only `v` and `f` records are read; polygons are fan-triangulated and
/// negative (relative) indices are resolved.
inline TriangleMesh parse_obj(const std::string& text) {
  TriangleMesh mesh;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw Error(ErrorCode::kMeshLoadError, "bad vertex on line " + std::to_string(line_no));
      }
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string ref;
      while (ls >> ref) {
        int idx = 0;
        try {
          idx = std::stoi(ref.substr(0, ref.find('/')));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kMeshLoadError, "bad face index on line " + std::to_string(line_no));
        }
        idx = idx < 0 ? static_cast<int>(mesh.vertices.size()) + idx : idx - 1;
        poly.push_back(idx);
      }
      if (poly.size() < 3) {
        throw Error(ErrorCode::kMeshLoadError, "face with < 3 vertices on line " + std::to_string(line_no));
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  if (mesh.empty()) throw Error(ErrorCode::kMeshLoadError, "OBJ has no vertices or faces");
  try {
    mesh.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMeshLoadError, e.what());
  }
  return mesh;
}

inline TriangleMesh read_obj(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMeshLoadError, e.what());
  }
  return parse_obj(text);
}

inline std::string encode_obj(const TriangleMesh& mesh) {
  std::string out;
  for (const auto& v : mesh.vertices) {
    out += "v " + format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()) + "\n";
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " +
           std::to_string(f[2] + 1) + "\n";
  }
  return out;
}

inline void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  write_file(path, encode_obj(mesh));
}

// ---------------------------------------------------------------- XYZ

inline std::string encode_xyz(const PointCloud& cloud) {
  std::string out;
  for (const auto& p : cloud.points) {
    out += format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z()) + "\n";
  }
  return out;
}

inline PointCloud parse_xyz(const std::string& text) {
  PointCloud cloud;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double x, y, z;
    if (ls >> x >> y >> z) {
      cloud.points.emplace_back(x, y, z);
    } else if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw Error(ErrorCode::kParseError, "bad XYZ line: " + line);
    }
  }
  return cloud;
}

inline void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file(path, encode_xyz(cloud));
}
inline PointCloud read_xyz(const std::filesystem::path& path) { return parse_xyz(read_file(path)); }

// ---------------------------------------------------------------- VOXG1
//
//   VOXG1 <res> <cx> <cy> <cz> <extent>\n
//   F32\n  + res^3 little-endian float32, x fastest
//   BIT\n  + ceil(res^3 / 8) bytes, LSB first, x fastest

namespace detail {
inline std::string voxg_header(const GridSpec& spec, const char* token) {
  return "VOXG1 " + std::to_string(spec.resolution) + " " + format_double(spec.center.x()) + " " +
         format_double(spec.center.y()) + " " + format_double(spec.center.z()) + " " +
         format_double(spec.extent) + "\n" + token + "\n";
}

struct VoxgHeader {
  GridSpec spec;
  std::string kind;
  std::size_t payload_offset = 0;
};

inline VoxgHeader parse_voxg_header(const std::string& bytes) {
  const std::size_t eol1 = bytes.find('\n');
  if (eol1 == std::string::npos) throw Error(ErrorCode::kParseError, "VOXG1 header missing");
  const std::size_t eol2 = bytes.find('\n', eol1 + 1);
  if (eol2 == std::string::npos) throw Error(ErrorCode::kParseError, "VOXG1 kind token missing");
  std::istringstream hs(bytes.substr(0, eol1));
  std::string magic;
  VoxgHeader h;
  double cx, cy, cz;
  if (!(hs >> magic >> h.spec.resolution >> cx >> cy >> cz >> h.spec.extent) || magic != "VOXG1") {
    throw Error(ErrorCode::kParseError, "malformed VOXG1 header");
  }
  h.spec.center = Vec3(cx, cy, cz);
  h.spec.validate();
  h.kind = bytes.substr(eol1 + 1, eol2 - eol1 - 1);
  h.payload_offset = eol2 + 1;
  return h;
}
}  // namespace detail

inline std::string encode_voxg(const OccupancyGrid& grid) {
  std::string out = detail::voxg_header(grid.spec, "F32");
  out.reserve(out.size() + 4 * grid.values.size());
  for (double v : grid.values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
  }
  return out;
}

inline std::string encode_voxg(const BinaryGrid& grid) {
  std::string out = detail::voxg_header(grid.spec, "BIT");
  std::string payload((grid.bits.size() + 7) / 8, '\0');
  for (std::size_t k = 0; k < grid.bits.size(); ++k) {
    if (grid.bits[k]) payload[k / 8] = static_cast<char>(payload[k / 8] | (1u << (k % 8)));
  }
  return out + payload;
}

inline OccupancyGrid decode_voxg_real(const std::string& bytes) {
  const auto h = detail::parse_voxg_header(bytes);
  if (h.kind != "F32") throw Error(ErrorCode::kParseError, "expected an F32 grid, got " + h.kind);
  const std::size_t n = h.spec.voxel_count();
  if (bytes.size() < h.payload_offset + 4 * n) throw Error(ErrorCode::kParseError, "truncated F32 grid");
  OccupancyGrid grid{h.spec, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[h.payload_offset + 4 * k + b]))
              << (8 * b);
    }
    grid.values[k] = std::bit_cast<float>(bits);
  }
  return grid;
}

inline BinaryGrid decode_voxg_binary(const std::string& bytes) {
  const auto h = detail::parse_voxg_header(bytes);
  if (h.kind != "BIT") throw Error(ErrorCode::kParseError, "expected a BIT grid, got " + h.kind);
  const std::size_t n = h.spec.voxel_count();
  if (bytes.size() < h.payload_offset + (n + 7) / 8) {
    throw Error(ErrorCode::kParseError, "truncated BIT grid");
  }
  BinaryGrid grid(h.spec);
  for (std::size_t k = 0; k < n; ++k) {
    grid.bits[k] = (static_cast<unsigned char>(bytes[h.payload_offset + k / 8]) >> (k % 8)) & 1u;
  }
  return grid;
}

inline std::string voxg_kind(const std::string& bytes) { return detail::parse_voxg_header(bytes).kind; }

// ---------------------------------------------------------------- JSON

inline json quat_to_json(const UnitQuaternion& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

inline UnitQuaternion quat_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::kParseError, "quaternion must be [w,x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline json graph_to_json(const RelativePoseGraph& g) {
  json edges = json::array();
  for (const auto& e : g.edges()) edges.push_back({{"i", e.i}, {"j", e.j}, {"q", quat_to_json(e.q)}});
  return {{"n_views", g.n_views()}, {"edges", edges}};
}

inline RelativePoseGraph graph_from_json(const json& j) {
  try {
    std::vector<RelativePose> preds;
    for (const auto& e : j.at("edges")) {
      preds.push_back({e.at("i").get<int>(), e.at("j").get<int>(), quat_from_json(e.at("q"))});
    }
    return build_graph(j.at("n_views").get<int>(), preds);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("graph JSON: ") + e.what());
  }
}

inline json poses_to_json(const AbsolutePoseSet& p) {
  json rots = json::array();
  for (const auto& q : p.rotations) rots.push_back(quat_to_json(q));
  return {{"rotations", rots}, {"residual", p.residual}, {"iterations", p.iterations}};
}

inline AbsolutePoseSet poses_from_json(const json& j) {
  try {
    AbsolutePoseSet p;
    for (const auto& q : j.at("rotations")) p.rotations.push_back(quat_from_json(q));
    p.residual = j.value("residual", 0.0);
    p.iterations = j.value("iterations", 0);
    if (p.rotations.empty()) throw Error(ErrorCode::kParseError, "pose set has no rotations");
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("pose JSON: ") + e.what());
  }
}

inline json report_to_json(const MetricReport& r) {
  return {{"iou", r.iou},
          {"chamfer_x100", r.chamfer_x100},
          {"pose_accuracy", r.pose_accuracy},
          {"pose_median_deg", r.pose_median_deg}};
}

inline MetricReport report_from_json(const json& j) {
  try {
    return {j.at("iou").get<double>(), j.at("chamfer_x100").get<double>(),
            j.at("pose_accuracy").get<double>(), j.at("pose_median_deg").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("report JSON: ") + e.what());
  }
}

inline json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

}  // namespace mvrecon::io

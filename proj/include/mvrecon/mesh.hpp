#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mvrecon/error.hpp"
#include "mvrecon/geometry.hpp"

namespace mvrecon {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  void validate() const {
    const int nv = static_cast<int>(vertices.size());
    for (const auto& f : faces) {
      for (int idx : f) {
        if (idx < 0 || idx >= nv) {
          throw Error(ErrorCode::kInvalidArgument, "face index " + std::to_string(idx) +
                                                       " out of range for " + std::to_string(nv) +
                                                       " vertices");
        }
      }
      if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
        throw Error(ErrorCode::kInvalidArgument, "degenerate face with repeated vertex index");
      }
    }
  }

  bool empty() const { return faces.empty() || vertices.empty(); }
};

struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Applies R(q) to every vertex. Rendering and voxelization both go through
/// this so that pre-rotated meshes reproduce identical floating-point values.
inline TriangleMesh rotate_mesh(const TriangleMesh& mesh, const UnitQuaternion& q) {
  const RotationMatrix r = q.to_matrix();
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = r * v;
  return out;
}

inline PointCloud rotate_cloud(const PointCloud& cloud, const UnitQuaternion& q) {
  const RotationMatrix r = q.to_matrix();
  PointCloud out = cloud;
  for (auto& p : out.points) p = r * p;
  return out;
}

/// Centers the bounding box at the origin and scales so the farthest vertex
/// lies at radius 0.5 (unit-diameter bounding sphere).
inline TriangleMesh normalize_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw Error(ErrorCode::kEmptyMesh, "mesh has no vertices");
  Vec3 lo = mesh.vertices.front(), hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec3 center = 0.5 * (lo + hi);
  double radius = 0.0;
  for (const auto& v : mesh.vertices) radius = std::max(radius, (v - center).norm());
  if (!(radius > 0.0)) throw Error(ErrorCode::kEmptyMesh, "mesh vertices all coincide");
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = (v - center) * (0.5 / radius);
  return out;
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

/// Area-uniform surface samples: triangle drawn proportionally to area,
/// barycentric-uniform inside it.
inline PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw Error(ErrorCode::kEmptyMesh, "cannot sample an empty mesh");
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    total += triangle_area(mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]]);
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kEmptyMesh, "mesh has zero surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double pick = uni(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& face = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double s = std::sqrt(uni(rng));
    const double t = uni(rng);
    const Vec3& a = mesh.vertices[face[0]];
    const Vec3& b = mesh.vertices[face[1]];
    const Vec3& c = mesh.vertices[face[2]];
    cloud.points.push_back((1.0 - s) * a + s * (1.0 - t) * b + s * t * c);
  }
  return cloud;
}

// Test and sample meshes. All faces wind counter-clockwise seen from outside.

inline TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                            (i & 4) ? hi.z() : lo.z());
  }
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

/// Axis-aligned cube of the given edge length centered at the origin.
inline TriangleMesh make_cube(double edge = 1.0) {
  const double h = 0.5 * edge;
  return make_box(Vec3(-h, -h, -h), Vec3(h, h, h));
}

inline TriangleMesh make_icosahedron(double radius = 1.0) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  const double raw[12][3] = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& r : raw) m.vertices.push_back(Vec3(r[0], r[1], r[2]).normalized() * radius);
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return m;
}

/// Icosahedron refined `levels` times with vertices pushed to the sphere.
inline TriangleMesh make_icosphere(int levels, double radius = 1.0) {
  TriangleMesh m = make_icosahedron(1.0);
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      m.vertices.push_back((0.5 * (m.vertices[a] + m.vertices[b])).normalized());
      const int idx = static_cast<int>(m.vertices.size()) - 1;
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> faces;
    faces.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    m.faces = std::move(faces);
  }
  for (auto& v : m.vertices) v *= radius;
  return m;
}

}  // namespace mvrecon

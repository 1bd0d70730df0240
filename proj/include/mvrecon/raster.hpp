#pragma once

// Image-domain machinery: silhouette rasterization, contour extraction,
// contour point lifting and exact Euclidean distance transforms.
//
// Pixel (row, col) has its center at image coordinates (u, v) = (col, row).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <random>
#include <vector>

#include "mvrecon/error.hpp"
#include "mvrecon/geometry.hpp"
#include "mvrecon/mesh.hpp"
#include "mvrecon/parallel.hpp"

namespace mvrecon {

struct Pixel {
  int row;
  int col;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Silhouette {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;  // row-major, values in {0, 1}

  Silhouette() = default;
  Silhouette(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), mask(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int row, int col) const { return mask[index(row, col)]; }
  std::uint8_t& at(int row, int col) { return mask[index(row, col)]; }
  bool contains(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }

  friend bool operator==(const Silhouette&, const Silhouette&) = default;
};

struct DistanceField {
  int width = 0;
  int height = 0;
  std::vector<double> dist;  // row-major, pixel units

  double at(int row, int col) const { return dist[static_cast<std::size_t>(row) * width + col]; }
};

/// Contour points lifted to 3D, expressed in the target view's camera frame
/// (rotation and t* applied), which is the frame the contour loss expects.
struct ContourPointSet {
  std::vector<Vec3> points;
};

namespace detail {

struct ScreenTriangle {
  PixelCoord a, b, c;
  double umin, umax, vmin, vmax;
};

inline double edge_function(const PixelCoord& a, const PixelCoord& b, double u, double v) {
  return (b.u - a.u) * (v - a.v) - (b.v - a.v) * (u - a.u);
}

// Top edges run in +u with zero slope, left edges run in -v (image v points down).
inline bool is_top_left(const PixelCoord& a, const PixelCoord& b) {
  const double dv = b.v - a.v;
  const double du = b.u - a.u;
  return dv < 0.0 || (dv == 0.0 && du > 0.0);
}

inline bool edge_covers(const PixelCoord& a, const PixelCoord& b, double u, double v) {
  const double e = edge_function(a, b, u, v);
  return e > 0.0 || (e == 0.0 && is_top_left(a, b));
}

}  // namespace detail

/// Binary silhouette of `mesh` rotated by `rotation` and translated by t*.
/// A pixel is set when its center lies inside at least one projected
/// triangle; triangles with a vertex at depth <= 1e-6 are dropped.
inline Silhouette render_silhouette(const TriangleMesh& mesh, const UnitQuaternion& rotation,
                                    const CameraModel& cam) {
  cam.validate();
  mesh.validate();
  const TriangleMesh posed = rotate_mesh(mesh, rotation);

  std::vector<detail::ScreenTriangle> tris;
  tris.reserve(posed.faces.size());
  for (const auto& f : posed.faces) {
    std::array<Vec3, 3> p;
    bool visible = true;
    for (int k = 0; k < 3; ++k) {
      p[k] = posed.vertices[f[k]] + cam.translation;
      if (!(p[k].z() > kMinDepth)) visible = false;
    }
    if (!visible) continue;
    detail::ScreenTriangle t{project(cam, p[0]), project(cam, p[1]), project(cam, p[2]), 0, 0, 0, 0};
    const double area = detail::edge_function(t.a, t.b, t.c.u, t.c.v);
    if (area == 0.0 || !std::isfinite(area)) continue;
    if (area < 0.0) std::swap(t.b, t.c);
    t.umin = std::min({t.a.u, t.b.u, t.c.u});
    t.umax = std::max({t.a.u, t.b.u, t.c.u});
    t.vmin = std::min({t.a.v, t.b.v, t.c.v});
    t.vmax = std::max({t.a.v, t.b.v, t.c.v});
    if (t.umax < 0.0 || t.vmax < 0.0 || t.umin > cam.width - 1 || t.vmin > cam.height - 1) continue;
    tris.push_back(t);
  }

  Silhouette sil(cam.width, cam.height);
  parallel_for(0, static_cast<std::size_t>(cam.height), [&](std::size_t r) {
    const int row = static_cast<int>(r);
    const double v = row;
    for (const auto& t : tris) {
      if (v < t.vmin || v > t.vmax) continue;
      const int c0 = static_cast<int>(std::max(0.0, std::ceil(t.umin)));
      const int c1 = static_cast<int>(std::min(cam.width - 1.0, std::floor(t.umax)));
      for (int col = c0; col <= c1; ++col) {
        const double u = col;
        if (detail::edge_covers(t.a, t.b, u, v) && detail::edge_covers(t.b, t.c, u, v) &&
            detail::edge_covers(t.c, t.a, u, v)) {
          sil.at(row, col) = 1;
        }
      }
    }
  });
  if (sil.count() == 0) throw Error(ErrorCode::kEmptyRender, "no pixel covered by the mesh");
  return sil;
}

/// Foreground pixels with at least one background 4-neighbor. The image
/// border counts as background. Row-major order.
inline std::vector<Pixel> extract_contour_pixels(const Silhouette& s) {
  std::vector<Pixel> out;
  bool any = false;
  for (int r = 0; r < s.height; ++r) {
    for (int c = 0; c < s.width; ++c) {
      if (!s.at(r, c)) continue;
      any = true;
      const auto bg = [&](int rr, int cc) { return !s.contains(rr, cc) || !s.at(rr, cc); };
      if (bg(r - 1, c) || bg(r + 1, c) || bg(r, c - 1) || bg(r, c + 1)) out.push_back({r, c});
    }
  }
  if (!any) throw Error(ErrorCode::kEmptySilhouette, "silhouette has no foreground pixel");
  return out;
}

namespace detail {

// Exact 1D squared-distance transform (lower envelope of parabolas rooted
// at finite samples). `f` holds squared distances, +inf where unseeded.
inline void squared_distance_1d(std::vector<double>& f, std::vector<int>& roots,
                                std::vector<double>& bounds) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  roots.clear();
  bounds.clear();
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    double s = -inf;
    while (!roots.empty()) {
      const int p = roots.back();
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= bounds.back()) {
        roots.pop_back();
        bounds.pop_back();
      } else {
        break;
      }
    }
    if (roots.empty()) s = -inf;
    roots.push_back(q);
    bounds.push_back(s);
  }
  if (roots.empty()) return;
  std::vector<double> src = f;
  std::size_t k = 0;
  for (int q = 0; q < n; ++q) {
    while (k + 1 < roots.size() && bounds[k + 1] <= q) ++k;
    const double d = q - roots[k];
    f[q] = d * d + src[roots[k]];
  }
}

}  // namespace detail

/// Exact Euclidean distance from every pixel center to the nearest seed.
inline DistanceField distance_transform(const std::vector<Pixel>& seeds, int width, int height) {
  if (seeds.empty()) throw Error(ErrorCode::kNoSeeds, "distance transform needs at least one seed");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidArgument, "empty image");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> sq(static_cast<std::size_t>(width) * height, inf);
  for (const auto& s : seeds) {
    if (s.row < 0 || s.row >= height || s.col < 0 || s.col >= width) {
      throw Error(ErrorCode::kInvalidArgument, "seed out of bounds");
    }
    sq[static_cast<std::size_t>(s.row) * width + s.col] = 0.0;
  }

  parallel_for(0, static_cast<std::size_t>(width), [&](std::size_t c) {
    std::vector<double> line(height);
    std::vector<int> roots;
    std::vector<double> bounds;
    for (int r = 0; r < height; ++r) line[r] = sq[r * width + c];
    detail::squared_distance_1d(line, roots, bounds);
    for (int r = 0; r < height; ++r) sq[r * width + c] = line[r];
  });
  parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t r) {
    std::vector<double> line(sq.begin() + r * width, sq.begin() + (r + 1) * width);
    std::vector<int> roots;
    std::vector<double> bounds;
    detail::squared_distance_1d(line, roots, bounds);
    std::copy(line.begin(), line.end(), sq.begin() + r * width);
  });

  DistanceField field{width, height, std::move(sq)};
  for (auto& d : field.dist) d = std::sqrt(d);
  return field;
}

/// Bilinear lookup at image coordinates (u = column, v = row); coordinates
/// are clamped to the pixel-center range first.
inline double sample_field_bilinear(const DistanceField& f, double u, double v) {
  u = std::clamp(u, 0.0, static_cast<double>(f.width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(f.height - 1));
  const int c0 = static_cast<int>(std::floor(u));
  const int r0 = static_cast<int>(std::floor(v));
  const int c1 = std::min(c0 + 1, f.width - 1);
  const int r1 = std::min(r0 + 1, f.height - 1);
  const double fu = u - c0;
  const double fv = v - r0;
  const double top = (1.0 - fu) * f.at(r0, c0) + fu * f.at(r0, c1);
  const double bottom = (1.0 - fu) * f.at(r1, c0) + fu * f.at(r1, c1);
  return (1.0 - fv) * top + fv * bottom;
}

/// Max per-axis offset between a projection and a contour pixel center for
/// the point to count as lying on the contour. Rounding alone (0.5) would
/// reject silhouette corners, which project just outside the rasterized mask.
inline constexpr double kContourSnapTolerance = 0.75;

/// Cloud points whose projection falls on the contour of `s`, returned in
/// the view's camera frame. More than `max_points` candidates are reduced by
/// seeded uniform sampling without replacement (input order preserved).
inline ContourPointSet lift_contour_points(const PointCloud& cloud, const UnitQuaternion& rotation,
                                           const CameraModel& cam, const Silhouette& s,
                                           std::size_t max_points, std::uint64_t seed) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "point cloud is empty");
  if (max_points == 0) throw Error(ErrorCode::kInvalidArgument, "max_points must be >= 1");
  if (s.width != cam.width || s.height != cam.height) {
    throw Error(ErrorCode::kSizeMismatch, "silhouette size differs from camera image size");
  }
  Silhouette contour(s.width, s.height);
  for (const auto& px : extract_contour_pixels(s)) contour.at(px.row, px.col) = 1;

  const RotationMatrix r = rotation.to_matrix();
  std::vector<Vec3> candidates;
  for (const auto& x : cloud.points) {
    const Vec3 p = r * x + cam.translation;
    if (!(p.z() > kMinDepth)) continue;
    const PixelCoord uv = project(cam, p);
    const int rc = static_cast<int>(std::lround(uv.v));
    const int cc = static_cast<int>(std::lround(uv.u));
    bool hit = false;
    for (int dr = -1; dr <= 1 && !hit; ++dr) {
      for (int dc = -1; dc <= 1 && !hit; ++dc) {
        const int row = rc + dr, col = cc + dc;
        if (!contour.contains(row, col) || !contour.at(row, col)) continue;
        hit = std::abs(uv.v - row) <= kContourSnapTolerance &&
              std::abs(uv.u - col) <= kContourSnapTolerance;
      }
    }
    if (hit) candidates.push_back(p);
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoContourPoints, "no cloud point projects onto the contour");
  }
  ContourPointSet out;
  if (candidates.size() <= max_points) {
    out.points = std::move(candidates);
  } else {
    std::mt19937_64 rng(seed);
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(out.points), max_points,
                rng);
  }
  return out;
}

}  // namespace mvrecon

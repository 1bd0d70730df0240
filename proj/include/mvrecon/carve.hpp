#pragma once

// Occupancy grid from weighted silhouette votes, its binarization and a
// morphological cleanup pass.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "mvrecon/error.hpp"
#include "mvrecon/geometry.hpp"
#include "mvrecon/parallel.hpp"
#include "mvrecon/raster.hpp"

namespace mvrecon {

/// Cubic lattice of `resolution`^3 voxels, x-fastest linear order.
struct GridSpec {
  int resolution = 32;
  Vec3 center = Vec3::Zero();
  double extent = 1.1;

  void validate() const {
    if (resolution < 2) throw Error(ErrorCode::kInvalidArgument, "grid resolution must be >= 2");
    if (!(extent > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid extent must be > 0");
  }

  std::size_t voxel_count() const {
    const auto r = static_cast<std::size_t>(resolution);
    return r * r * r;
  }
  double voxel_size() const { return extent / resolution; }

  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(resolution) *
               (static_cast<std::size_t>(iy) + static_cast<std::size_t>(resolution) * iz);
  }
  std::array<int, 3> coords(std::size_t idx) const {
    const auto r = static_cast<std::size_t>(resolution);
    return {static_cast<int>(idx % r), static_cast<int>((idx / r) % r),
            static_cast<int>(idx / (r * r))};
  }
  Vec3 centroid(int ix, int iy, int iz) const {
    const double h = voxel_size();
    const Vec3 origin = center - Vec3::Constant(0.5 * extent);
    return origin + Vec3((ix + 0.5) * h, (iy + 0.5) * h, (iz + 0.5) * h);
  }
  bool contains(int ix, int iy, int iz) const {
    return ix >= 0 && iy >= 0 && iz >= 0 && ix < resolution && iy < resolution && iz < resolution;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct OccupancyGrid {
  GridSpec spec;
  std::vector<double> values;  // in [0, 1]
};

struct BinaryGrid {
  GridSpec spec;
  std::vector<std::uint8_t> bits;  // in {0, 1}

  explicit BinaryGrid(const GridSpec& s = {}) : spec(s), bits(s.voxel_count(), 0) {}

  std::uint8_t at(int ix, int iy, int iz) const { return bits[spec.index(ix, iy, iz)]; }
  std::uint8_t& at(int ix, int iy, int iz) { return bits[spec.index(ix, iy, iz)]; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }

  friend bool operator==(const BinaryGrid&, const BinaryGrid&) = default;
};

struct ViewWeights {
  std::vector<double> w;
};

/// Reference view gets w1, the remaining n-1 views share 1 - w1 equally.
inline ViewWeights make_weights(int n, double w1) {
  if (n < 1) throw Error(ErrorCode::kInvalidWeight, "need at least one view");
  if (n == 1) return {{1.0}};
  if (!(w1 > 0.0) || !(w1 < 1.0)) {
    throw Error(ErrorCode::kInvalidWeight, "reference weight must lie in (0, 1)");
  }
  const double rest = (1.0 - w1) / (n - 1);
  if (w1 < rest - 1e-12) {
    throw Error(ErrorCode::kInvalidWeight, "reference weight must not be below the other views'");
  }
  ViewWeights out;
  out.w.assign(static_cast<std::size_t>(n), rest);
  out.w[0] = w1;
  return out;
}

/// V(x) = sum_i w_i S_i(round(pi(R_i x + t*))) / sum_i w_i at every voxel
/// centroid. Projections outside the image, or behind the camera, read as 0.
inline OccupancyGrid build_occupancy(const std::vector<Silhouette>& silhouettes,
                                     const std::vector<UnitQuaternion>& rotations,
                                     const CameraModel& cam, const GridSpec& spec,
                                     const ViewWeights& weights) {
  spec.validate();
  cam.validate();
  const std::size_t n = silhouettes.size();
  if (rotations.size() != n || weights.w.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "silhouette, rotation and weight counts differ");
  }
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "no views to carve from");
  for (const auto& s : silhouettes) {
    if (s.width != cam.width || s.height != cam.height) {
      throw Error(ErrorCode::kSizeMismatch, "silhouette size differs from camera image size");
    }
  }
  double weight_sum = 0.0;
  for (double w : weights.w) weight_sum += w;
  if (!(weight_sum > 0.0)) throw Error(ErrorCode::kInvalidWeight, "weights sum to zero");

  std::vector<RotationMatrix> mats(n);
  for (std::size_t k = 0; k < n; ++k) mats[k] = rotations[k].to_matrix();

  OccupancyGrid grid{spec, std::vector<double>(spec.voxel_count(), 0.0)};
  parallel_for(0, spec.voxel_count(), [&](std::size_t idx) {
    const auto [ix, iy, iz] = spec.coords(idx);
    const Vec3 x = spec.centroid(ix, iy, iz);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec3 p = mats[k] * x + cam.translation;
      if (!(p.z() > kMinDepth)) continue;
      const PixelCoord uv = project(cam, p);
      const double col = std::round(uv.u), row = std::round(uv.v);
      if (col < 0.0 || row < 0.0 || col > cam.width - 1 || row > cam.height - 1) continue;
      if (silhouettes[k].at(static_cast<int>(row), static_cast<int>(col))) acc += weights.w[k];
    }
    grid.values[idx] = acc / weight_sum;
  });
  return grid;
}

/// Bit set iff value >= tau.
inline BinaryGrid binarize(const OccupancyGrid& grid, double tau) {
  if (!(tau > 0.0) || !(tau < 1.0)) {
    throw Error(ErrorCode::kInvalidThreshold, "threshold must lie in (0, 1)");
  }
  BinaryGrid out(grid.spec);
  for (std::size_t k = 0; k < grid.values.size(); ++k) out.bits[k] = grid.values[k] >= tau;
  return out;
}

namespace detail {

inline constexpr std::array<std::array<int, 3>, 6> kFaceNeighbors = {
    {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

// 6-connected cross structuring element. Out-of-grid neighbors are
// skipped: background for dilation, foreground for erosion.
inline BinaryGrid morph(const BinaryGrid& in, bool dilate) {
  const GridSpec& s = in.spec;
  BinaryGrid out(s);
  for (int z = 0; z < s.resolution; ++z) {
    for (int y = 0; y < s.resolution; ++y) {
      for (int x = 0; x < s.resolution; ++x) {
        bool v = in.at(x, y, z);
        for (const auto& d : kFaceNeighbors) {
          const int nx = x + d[0], ny = y + d[1], nz = z + d[2];
          if (!s.contains(nx, ny, nz)) continue;
          if (dilate) {
            v = v || in.at(nx, ny, nz);
          } else {
            v = v && in.at(nx, ny, nz);
          }
        }
        out.at(x, y, z) = v;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Closing with the radius-1 cross, then keep the largest 6-connected
/// component (ties go to the component reached first in linear order).
/// Erosion treats out-of-grid neighbors as foreground, so closing never
/// removes an input voxel.
inline BinaryGrid cleanup(const BinaryGrid& grid) {
  const BinaryGrid closed = detail::morph(detail::morph(grid, true), false);
  const GridSpec& s = grid.spec;
  std::vector<int> label(s.voxel_count(), -1);
  std::vector<std::size_t> sizes;
  for (std::size_t start = 0; start < s.voxel_count(); ++start) {
    if (!closed.bits[start] || label[start] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    std::size_t size = 0;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    label[start] = id;
    while (!frontier.empty()) {
      const std::size_t cur = frontier.front();
      frontier.pop();
      ++size;
      const auto [x, y, z] = s.coords(cur);
      for (const auto& d : detail::kFaceNeighbors) {
        const int nx = x + d[0], ny = y + d[1], nz = z + d[2];
        if (!s.contains(nx, ny, nz)) continue;
        const std::size_t ni = s.index(nx, ny, nz);
        if (closed.bits[ni] && label[ni] < 0) {
          label[ni] = id;
          frontier.push(ni);
        }
      }
    }
    sizes.push_back(size);
  }
  BinaryGrid out(s);
  if (sizes.empty()) return out;
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (std::size_t k = 0; k < label.size(); ++k) out.bits[k] = label[k] == best;
  return out;
}

}  // namespace mvrecon

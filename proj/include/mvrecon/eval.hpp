#pragma once

// Shape-quality metrics: solid ground-truth voxelization, voxel IoU and the
// normalized Chamfer distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "mvrecon/carve.hpp"
#include "mvrecon/error.hpp"
#include "mvrecon/geometry.hpp"
#include "mvrecon/mesh.hpp"
#include "mvrecon/parallel.hpp"

namespace mvrecon {

struct MetricReport {
  double iou = 0.0;
  double chamfer_x100 = 0.0;
  double pose_accuracy = 0.0;
  double pose_median_deg = 0.0;
};

/// Solid voxelization of `mesh` after rotating it by `rotation`. Voxels
/// touched by a dense surface sampling (spacing <= voxel/4) are marked, then
/// everything not reachable from the grid boundary through unmarked voxels
/// (6-connected) is filled.
inline BinaryGrid voxelize_solid(const TriangleMesh& mesh, const UnitQuaternion& rotation,
                                 const GridSpec& spec) {
  if (mesh.empty()) throw Error(ErrorCode::kEmptyMesh, "cannot voxelize an empty mesh");
  spec.validate();
  mesh.validate();
  const TriangleMesh posed = rotate_mesh(mesh, rotation);
  const double h = spec.voxel_size();
  const double spacing = 0.25 * h;
  const Vec3 origin = spec.center - Vec3::Constant(0.5 * spec.extent);

  BinaryGrid surface(spec);
  auto mark = [&](const Vec3& p) {
    const Vec3 g = (p - origin) / h;
    const int ix = static_cast<int>(std::floor(g.x()));
    const int iy = static_cast<int>(std::floor(g.y()));
    const int iz = static_cast<int>(std::floor(g.z()));
    if (spec.contains(ix, iy, iz)) surface.at(ix, iy, iz) = 1;
  };
  for (const auto& f : posed.faces) {
    const Vec3& a = posed.vertices[f[0]];
    const Vec3& b = posed.vertices[f[1]];
    const Vec3& c = posed.vertices[f[2]];
    const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    const int k = std::max(1, static_cast<int>(std::ceil(longest / spacing)));
    for (int s = 0; s <= k; ++s) {
      for (int t = 0; s + t <= k; ++t) {
        const double bs = static_cast<double>(s) / k;
        const double bt = static_cast<double>(t) / k;
        mark((1.0 - bs - bt) * a + bs * b + bt * c);
      }
    }
  }

  const int r = spec.resolution;
  std::vector<std::uint8_t> outside(spec.voxel_count(), 0);
  std::queue<std::size_t> frontier;
  auto seed = [&](int x, int y, int z) {
    const std::size_t idx = spec.index(x, y, z);
    if (!surface.bits[idx] && !outside[idx]) {
      outside[idx] = 1;
      frontier.push(idx);
    }
  };
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) {
      seed(0, a, b);
      seed(r - 1, a, b);
      seed(a, 0, b);
      seed(a, r - 1, b);
      seed(a, b, 0);
      seed(a, b, r - 1);
    }
  }
  while (!frontier.empty()) {
    const auto [x, y, z] = spec.coords(frontier.front());
    frontier.pop();
    for (const auto& d : detail::kFaceNeighbors) {
      const int nx = x + d[0], ny = y + d[1], nz = z + d[2];
      if (spec.contains(nx, ny, nz)) seed(nx, ny, nz);
    }
  }
  BinaryGrid solid(spec);
  for (std::size_t k = 0; k < solid.bits.size(); ++k) solid.bits[k] = !outside[k];
  return solid;
}

/// |a and b| / |a or b|, 1.0 when both grids are empty.
inline double iou(const BinaryGrid& a, const BinaryGrid& b) {
  if (!(a.spec == b.spec) || a.bits.size() != b.bits.size()) {
    throw Error(ErrorCode::kSpecMismatch, "grids have different specs");
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < a.bits.size(); ++k) {
    inter += a.bits[k] && b.bits[k];
    uni += a.bits[k] || b.bits[k];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Occupied voxel centroids in world units, linear index order.
inline PointCloud grid_to_cloud(const BinaryGrid& grid) {
  PointCloud cloud;
  for (std::size_t k = 0; k < grid.bits.size(); ++k) {
    if (!grid.bits[k]) continue;
    const auto [x, y, z] = grid.spec.coords(k);
    cloud.points.push_back(grid.spec.centroid(x, y, z));
  }
  if (cloud.empty()) throw Error(ErrorCode::kEmptyGrid, "grid has no occupied voxel");
  return cloud;
}

/// Uniform-grid bucketing for exact nearest-neighbor distance queries.
class NearestNeighborIndex {
 public:
  explicit NearestNeighborIndex(const std::vector<Vec3>& points) : points_(points) {
    if (points_.empty()) throw Error(ErrorCode::kEmptyCloud, "cannot index an empty cloud");
    lo_ = hi_ = points_.front();
    for (const auto& p : points_) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    const double target = std::cbrt(static_cast<double>(points_.size()) / 2.0);
    cells_ = std::clamp(static_cast<int>(std::ceil(target)), 1, 64);
    const Vec3 span = (hi_ - lo_).cwiseMax(Vec3::Constant(1e-12));
    cell_size_ = span / cells_;
    min_cell_ = cell_size_.minCoeff();
    buckets_.resize(static_cast<std::size_t>(cells_) * cells_ * cells_);
    for (std::size_t k = 0; k < points_.size(); ++k) {
      const auto c = cell_of(points_[k]);
      buckets_[bucket(c[0], c[1], c[2])].push_back(k);
    }
  }

  double nearest_distance(const Vec3& q) const {
    const auto c = cell_of(q);
    double best = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring <= cells_; ++ring) {
      for (int x = c[0] - ring; x <= c[0] + ring; ++x) {
        for (int y = c[1] - ring; y <= c[1] + ring; ++y) {
          for (int z = c[2] - ring; z <= c[2] + ring; ++z) {
            if (x < 0 || y < 0 || z < 0 || x >= cells_ || y >= cells_ || z >= cells_) continue;
            const int cheb = std::max({std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])});
            if (cheb != ring) continue;
            for (std::size_t k : buckets_[bucket(x, y, z)]) {
              best = std::min(best, (points_[k] - q).norm());
            }
          }
        }
      }
      // Cells at ring + 1 are at least `ring` whole cells away.
      if (best <= ring * min_cell_) break;
    }
    return best;
  }

 private:
  std::array<int, 3> cell_of(const Vec3& p) const {
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
      const double g = std::floor((p(a) - lo_(a)) / cell_size_(a));
      c[a] = static_cast<int>(std::clamp(g, 0.0, cells_ - 1.0));
    }
    return c;
  }
  std::size_t bucket(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(cells_) * (static_cast<std::size_t>(y) +
                                               static_cast<std::size_t>(cells_) * z);
  }

  std::vector<Vec3> points_;
  Vec3 lo_, hi_, cell_size_;
  double min_cell_ = 0.0;
  int cells_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

/// Centroid at the origin, farthest point at radius 0.5.
inline PointCloud normalize_cloud(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "point cloud is empty");
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(cloud.size());
  double radius = 0.0;
  for (const auto& p : cloud.points) radius = std::max(radius, (p - centroid).norm());
  if (!(radius > 0.0)) throw Error(ErrorCode::kDegenerateCloud, "all cloud points coincide");
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back((p - centroid) * (0.5 / radius));
  return out;
}

/// Mean distance from each point of `from` to its nearest point of `to`.
inline double mean_nearest_distance(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  const NearestNeighborIndex index(to);
  std::vector<double> d(from.size());
  parallel_for(0, from.size(), [&](std::size_t k) { d[k] = index.nearest_distance(from[k]); });
  double total = 0.0;
  for (double v : d) total += v;
  return total / static_cast<double>(from.size());
}

/// 100 x symmetric mean nearest-neighbor distance between the two clouds,
/// each normalized independently. Distances are not squared.
inline double chamfer(const PointCloud& a, const PointCloud& b) {
  const PointCloud na = normalize_cloud(a);
  const PointCloud nb = normalize_cloud(b);
  const double ab = mean_nearest_distance(na.points, nb.points);
  const double ba = mean_nearest_distance(nb.points, na.points);
  return 100.0 * 0.5 * (ab + ba);
}

}  // namespace mvrecon

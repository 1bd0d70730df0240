#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace mvrecon;

namespace {

GridSpec unit_voxels(int res) {
  GridSpec s;
  s.resolution = res;
  s.extent = res;
  return s;
}

BinaryGrid random_grid(std::mt19937_64& rng, const GridSpec& spec, double p) {
  std::bernoulli_distribution coin(p);
  BinaryGrid g(spec);
  for (auto& b : g.bits) b = coin(rng);
  return g;
}

std::vector<Vec3> random_points(std::mt19937_64& rng, int n, double scale) {
  std::vector<Vec3> out;
  for (int k = 0; k < n; ++k) out.push_back(oracle::random_vec(rng, scale));
  return out;
}

}  // namespace

// Voxel size 1 with centers at -3.5 .. 3.5; faces at +-1.9 fall in voxel
// layers 2 and 5 and enclose exactly the centers +-0.5, +-1.5.
TEST(VoxelizeSolid, CubeBlock) {
  const auto spec = unit_voxels(8);
  const auto cube = make_cube(3.8);
  const auto g = voxelize_solid(cube, UnitQuaternion::identity(), spec);
  for (int z = 0; z < 8; ++z)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        const bool in = x >= 2 && x <= 5 && y >= 2 && y <= 5 && z >= 2 && z <= 5;
        EXPECT_EQ(g.at(x, y, z), in ? 1 : 0);
      }
  const auto quarter = UnitQuaternion::from_axis_angle(Vec3(1, 1, 0), kPi / 2);
  const auto full_turn = quarter * quarter * quarter * quarter;
  EXPECT_EQ(voxelize_solid(cube, full_turn, spec).bits, g.bits);
}

TEST(VoxelizeSolid, HollowSphereIsFilled) {
  const GridSpec spec;
  const double radius = 0.45;
  const auto sphere = make_icosphere(3, radius);
  const auto g = voxelize_solid(sphere, UnitQuaternion::identity(), spec);
  const double margin = 0.5 * std::sqrt(3.0) * spec.voxel_size() + 0.005;
  std::size_t checked_inside = 0;
  for (std::size_t k = 0; k < g.bits.size(); ++k) {
    const auto [x, y, z] = spec.coords(k);
    const double r = spec.centroid(x, y, z).norm();
    if (r < radius - margin) {
      EXPECT_EQ(g.bits[k], 1);
      ++checked_inside;
    }
    if (r > radius + margin) EXPECT_EQ(g.bits[k], 0);
  }
  EXPECT_GT(checked_inside, 5000u);
}

TEST(VoxelizeSolid, RotationConsistent) {
  std::mt19937_64 rng(50);
  const auto mesh = normalize_mesh(make_icosahedron());
  for (int k = 0; k < 5; ++k) {
    const auto q = random_rotation(rng);
    EXPECT_EQ(voxelize_solid(mesh, q, GridSpec{}).bits,
              voxelize_solid(rotate_mesh(mesh, q), UnitQuaternion::identity(), GridSpec{}).bits);
  }
  EXPECT_THROW(voxelize_solid(TriangleMesh{}, UnitQuaternion{}, GridSpec{}), Error);
}

TEST(Iou, Cases) {
  const auto spec = unit_voxels(4);
  BinaryGrid a(spec), b(spec);
  EXPECT_EQ(iou(a, b), 1.0);
  a.at(0, 0, 0) = 1;
  a.at(1, 0, 0) = 1;
  EXPECT_EQ(iou(a, a), 1.0);
  b.at(1, 0, 0) = 1;
  EXPECT_EQ(iou(a, b), 0.5);
  BinaryGrid c(spec);
  c.at(3, 3, 3) = 1;
  EXPECT_EQ(iou(a, c), 0.0);
  try {
    iou(a, BinaryGrid(unit_voxels(5)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSpecMismatch);
  }
}

TEST(Iou, MatchesBruteForce) {
  std::mt19937_64 rng(51);
  const auto spec = unit_voxels(10);
  for (int k = 0; k < 50; ++k) {
    const auto a = random_grid(rng, spec, 0.3), b = random_grid(rng, spec, 0.5);
    EXPECT_NEAR(iou(a, b), oracle::brute_iou(a, b), 1e-9);
    EXPECT_EQ(iou(a, b), iou(b, a));
  }
}

TEST(GridToCloud, Examples) {
  GridSpec spec;
  spec.resolution = 3;
  spec.center = Vec3(1, 2, 3);
  BinaryGrid one(spec);
  one.at(1, 1, 1) = 1;
  const auto c1 = grid_to_cloud(one);
  ASSERT_EQ(c1.size(), 1u);
  EXPECT_LT((c1.points[0] - spec.center).norm(), 1e-15);

  BinaryGrid full(spec);
  std::fill(full.bits.begin(), full.bits.end(), 1);
  EXPECT_EQ(grid_to_cloud(full).size(), 27u);

  const auto u = unit_voxels(4);
  BinaryGrid ell(u);
  ell.at(0, 0, 0) = 1;
  ell.at(1, 0, 0) = 1;
  ell.at(0, 1, 0) = 1;
  const auto pts = grid_to_cloud(ell).points;
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0], Vec3(-1.5, -1.5, -1.5));
  EXPECT_EQ(pts[1], Vec3(-0.5, -1.5, -1.5));
  EXPECT_EQ(pts[2], Vec3(-1.5, -0.5, -1.5));

  EXPECT_THROW(grid_to_cloud(BinaryGrid(u)), Error);
}

TEST(SampleSurface, SingleTriangleAndDeterminism) {
  const Vec3 a(0, 0, 0), b(2, 0, 0), c(0, 1, 1);
  const TriangleMesh tri{{a, b, c}, {{0, 1, 2}}};
  const auto cloud = sample_surface(tri, 500, 3);
  const Vec3 n = (b - a).cross(c - a);
  for (const auto& p : cloud.points) {
    EXPECT_NEAR(n.dot(p - a), 0.0, 1e-12);
    // barycentric coordinates from areas
    const double total = triangle_area(a, b, c);
    const double la = triangle_area(p, b, c) / total, lb = triangle_area(a, p, c) / total,
                 lc = triangle_area(a, b, p) / total;
    EXPECT_NEAR(la + lb + lc, 1.0, 1e-9);
  }
  const auto again = sample_surface(tri, 500, 3);
  EXPECT_EQ(cloud.points, again.points);
}

TEST(SampleSurface, AreaProportionalCounts) {
  // areas 3 and 1
  const TriangleMesh two{{Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(0, 2, 0), Vec3(10, 0, 0), Vec3(11, 0, 0),
                          Vec3(10, 2, 0)},
                         {{0, 1, 2}, {3, 4, 5}}};
  double mean_big = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cloud = sample_surface(two, 10000, seed);
    int big = 0;
    for (const auto& p : cloud.points) big += p.x() < 5;
    EXPECT_NEAR(big, 7500, 150);
    mean_big += big / 10.0;
  }
  EXPECT_NEAR(mean_big, 7500, 50);
}

TEST(Chamfer, Examples) {
  std::mt19937_64 rng(52);
  const PointCloud a{random_points(rng, 200, 1.0)};
  EXPECT_EQ(chamfer(a, a), 0.0);
  for (int k = 0; k < 20; ++k) {
    const PointCloud x{random_points(rng, 150, 1.0)}, y{random_points(rng, 230, 2.0)};
    EXPECT_EQ(chamfer(x, y), chamfer(y, x));
    EXPECT_NEAR(chamfer(x, y), oracle::brute_chamfer(x.points, y.points), 1e-9);
  }
}

TEST(Chamfer, TranslationAndScaleInvariant) {
  std::mt19937_64 rng(53);
  const PointCloud a{random_points(rng, 300, 1.0)}, b{random_points(rng, 250, 1.0)};
  PointCloud moved;
  for (const auto& p : b.points) moved.points.push_back(3.7 * p + Vec3(1, -2, 5));
  EXPECT_NEAR(chamfer(a, b), chamfer(a, moved), 1e-9);
}

TEST(Chamfer, Errors) {
  const PointCloud pt{{Vec3(1, 1, 1), Vec3(1, 1, 1)}};
  const PointCloud ok{{Vec3(0, 0, 0), Vec3(1, 0, 0)}};
  try {
    chamfer(pt, ok);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCloud);
  }
  try {
    chamfer(PointCloud{}, ok);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCloud);
  }
}

TEST(NearestNeighbor, MatchesBruteForceExactly) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 10; ++trial) {
    auto pts = random_points(rng, 50 + 200 * trial, 1.0);
    // clustered and flat clouds too
    if (trial % 3 == 1)
      for (auto& p : pts) p.z() = 0.0;
    if (trial % 3 == 2)
      for (auto& p : pts) p *= (p.x() > 0 ? 0.01 : 1.0);
    const NearestNeighborIndex index(pts);
    for (const auto& q : random_points(rng, 200, 1.5)) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pts) best = std::min(best, (p - q).norm());
      EXPECT_EQ(index.nearest_distance(q), best);
    }
  }
}

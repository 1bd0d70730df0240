#include <gtest/gtest.h>

#include <filesystem>

#include "test_support.hpp"

using namespace mvrecon;
namespace fs = std::filesystem;

namespace {

ScenarioConfig cube_config(std::uint64_t seed, int views = 5) {
  ScenarioConfig cfg;
  cfg.mesh_path = "builtin:cube";
  cfg.seed = seed;
  cfg.n_views = views;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mvrecon_test_" + name);
  fs::remove_all(p);
  return p;
}

// Triangular prism, asymmetric in x and y, mirror-symmetric in z.
TriangleMesh prism() {
  const double xy[3][2] = {{-0.4, -0.3}, {0.5, -0.3}, {-0.4, 0.45}};
  TriangleMesh m;
  for (double z : {-0.3, 0.3})
    for (const auto& p : xy) m.vertices.emplace_back(p[0], p[1], z);
  m.faces = {{0, 2, 1}, {3, 4, 5}, {0, 1, 4}, {0, 4, 3}, {1, 2, 5}, {1, 5, 4}, {2, 0, 3}, {2, 3, 5}};
  return m;
}

}  // namespace

TEST(GenerateViews, CountsAndDeterminism) {
  const auto a = generate_views(cube_config(3));
  EXPECT_EQ(a.silhouettes.size(), 5u);
  EXPECT_EQ(a.true_relatives().size(), 20u);
  EXPECT_EQ(a.cloud.size(), kSurfaceSampleCount);
  const auto b = generate_views(cube_config(3));
  EXPECT_EQ(a.rotations, b.rotations);
  EXPECT_EQ(a.silhouettes, b.silhouettes);
  EXPECT_EQ(a.cloud.points, b.cloud.points);
  const auto c = generate_views(cube_config(4));
  EXPECT_NE(a.rotations, c.rotations);
}

TEST(GenerateViews, MeshIsNormalized) {
  const auto sc = generate_views(cube_config(1));
  double r = 0;
  for (const auto& v : sc.mesh.vertices) r = std::max(r, v.norm());
  EXPECT_NEAR(r, 0.5, 1e-12);
}

TEST(GenerateViews, OppositeAzimuthsMirror) {
  const std::vector<UnitQuaternion> rots{view_rotation_to_quat({0, 0}), view_rotation_to_quat({180, 0})};
  const auto sc = make_scenario(prism(), rots, CameraModel{}, 0);
  const auto& a = sc.silhouettes[0];
  const auto& b = sc.silhouettes[1];
  EXPECT_GT(a.count(), 500u);
  EXPECT_NE(a, b);
  for (int r = 0; r < a.height; ++r)
    for (int c = 0; c < a.width; ++c) EXPECT_EQ(a.at(r, c), b.at(r, a.width - 1 - c));
}

TEST(Perturb, NoiseBounds) {
  const auto sc = generate_views(cube_config(5));
  const auto exact = perturb_relative_poses(sc, 0.0, 1);
  for (const auto& e : exact.edges()) EXPECT_EQ(e.q, sc.true_relative(e.i, e.j));
  const auto noisy = perturb_relative_poses(sc, 10.0, 1);
  for (const auto& e : noisy.edges()) {
    EXPECT_LE(rad_to_deg(geodesic_angle(e.q, sc.true_relative(e.i, e.j))), 10.0 + 1e-9);
  }
  EXPECT_NE(noisy.edge(0, 1), noisy.edge(1, 0).inverse());
}

TEST(Perturb, MeanErrorIsHalfTheBound) {
  const auto sc = generate_views(cube_config(6));
  double total = 0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (const auto& e : perturb_relative_poses(sc, 10.0, seed).edges()) {
      total += rad_to_deg(geodesic_angle(e.q, sc.true_relative(e.i, e.j)));
      ++count;
    }
  }
  EXPECT_NEAR(total / count, 5.0, 1.0);
}

TEST(ScenarioDir, RoundTrip) {
  const auto dir = scratch("roundtrip");
  const auto sc = generate_views(cube_config(7, 3));
  write_scenario(dir, sc);
  const auto back = read_scenario(dir);
  EXPECT_EQ(back.rotations, sc.rotations);
  EXPECT_EQ(back.silhouettes, sc.silhouettes);
  EXPECT_EQ(back.cloud.points, sc.cloud.points);
  EXPECT_EQ(back.mesh.vertices, sc.mesh.vertices);
  EXPECT_EQ(back.camera, sc.camera);
  EXPECT_TRUE(fs::exists(dir / "view_002.pgm"));
  fs::remove_all(dir);
}

TEST(Config, JsonUsesFieldNames) {
  auto cfg = cube_config(9);
  cfg.camera = CameraModel::centered(96, 96, 100.0, Vec3(0, 0, 2.5));
  const auto j = config_to_json(cfg);
  for (const char* key : {"mesh_path", "n_views", "seed", "azimuth_range", "elevation_range",
                          "noise_max_deg", "w1", "carve_tau", "resolution", "camera"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  const auto back = config_from_json(j);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.camera, cfg.camera);
  EXPECT_EQ(back.carve_tau, 0.85);

  auto bad = j;
  bad["carve_tau"] = 1.5;
  try {
    config_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(is_validation_error(e.code()));
  }
}

TEST(PairLosses, ZeroAngularAtTruth) {
  const auto sc = generate_views(cube_config(10, 3));
  AbsolutePoseSet truth;
  for (const auto& q : sc.rotations) truth.rotations.push_back(q * sc.rotations[0].inverse());
  const auto rows = evaluate_pair_losses(sc, truth, {});
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_LT(r.angular, 1e-12);
    EXPECT_LE(r.contour, 0.75);
  }
}

TEST(Pipeline, NoiseFreeRecoversPoses) {
  const auto dir = scratch("pipeline");
  auto cfg = cube_config(11, 4);
  cfg.noise_max_deg = 0.0;
  cfg.resolution = 16;
  const auto result = run_pipeline(cfg, dir);
  EXPECT_EQ(result.report.pose_accuracy, 1.0);
  EXPECT_LT(result.report.pose_median_deg, 1e-4);
  EXPECT_GT(result.report.iou, 0.3);
  for (const char* f : {"config.json", "graph.json", "poses.json", "occupancy.voxg", "final.voxg",
                        "report.json", "scenario/scenario.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  fs::remove_all(dir);
}

TEST(Pipeline, StageErrorsNameTheStage) {
  const auto dir = scratch("pipeline_bad");
  auto cfg = cube_config(1);
  cfg.mesh_path = (dir / "missing.obj").string();
  try {
    run_pipeline(cfg, dir);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "generate");
  }
  fs::remove_all(dir);
}

TEST(Pipeline, IouDegradesWithNoise) {
  std::vector<double> mean;
  for (double noise : {0.0, 10.0, 25.0}) {
    double total = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto cfg = cube_config(seed);
      cfg.mesh_path = "builtin:icosahedron";
      const auto sc = generate_views(cfg);
      const auto poses = rectify(perturb_relative_poses(sc, noise, derive_seed(seed, kNoiseStream)));
      const auto grid = cleanup(binarize(carve_scenario(sc, poses.rotations, cfg.w1, cfg.resolution), cfg.carve_tau));
      total += iou(grid, voxelize_solid(sc.mesh, sc.rotations[0], grid.spec));
    }
    mean.push_back(total / 50);
  }
  EXPECT_GE(mean[0], mean[1]);
  EXPECT_GE(mean[1], mean[2]);
}

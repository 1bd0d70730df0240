#include <gtest/gtest.h>

#include <functional>

#include "test_support.hpp"

using namespace mvrecon;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

Silhouette square(int w, int h, int r0, int c0, int size) {
  Silhouette s(w, h);
  for (int r = r0; r < r0 + size; ++r)
    for (int c = c0; c < c0 + size; ++c) s.at(r, c) = 1;
  return s;
}

}  // namespace

TEST(Render, FullFrameTriangle) {
  TriangleMesh tri{{Vec3(-10, -10, -1.2), Vec3(10, -10, -1.2), Vec3(0, 10, -1.2)}, {{0, 1, 2}}};
  const CameraModel cam;
  const Silhouette s = render_silhouette(tri, UnitQuaternion::identity(), cam);
  EXPECT_EQ(s.count(), static_cast<std::size_t>(cam.width * cam.height));
}

TEST(Render, BehindCameraIsEmpty) {
  TriangleMesh tri{{Vec3(-1, -1, -5), Vec3(1, -1, -5), Vec3(0, 1, -5)}, {{0, 1, 2}}};
  EXPECT_EQ(code_of([&] { render_silhouette(tri, UnitQuaternion::identity(), CameraModel{}); }),
            ErrorCode::kEmptyRender);
}

TEST(Render, CubeIsCenteredSquareMatchingBruteForce) {
  const CameraModel cam;
  const auto cube = make_cube();
  const Silhouette s = render_silhouette(cube, UnitQuaternion::identity(), cam);
  // front face at depth 1.7: half width 140 * 0.5 / 1.7 = 41.18 px around 63.5
  EXPECT_EQ(s.count(), 82u * 82u);
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c)
      EXPECT_EQ(s.at(r, c), (r >= 23 && r <= 104 && c >= 23 && c <= 104) ? 1 : 0);
  EXPECT_EQ(s, oracle::brute_render(cube, UnitQuaternion::identity(), cam));
}

TEST(Render, RandomViewsMatchBruteForce) {
  std::mt19937_64 rng(11);
  const CameraModel cam;
  const auto mesh = normalize_mesh(make_icosahedron());
  for (int k = 0; k < 10; ++k) {
    const auto q = random_rotation(rng);
    EXPECT_EQ(render_silhouette(mesh, q, cam), oracle::brute_render(mesh, q, cam));
  }
}

TEST(Render, CommutesWithPreRotation) {
  std::mt19937_64 rng(12);
  const CameraModel cam;
  const auto mesh = normalize_mesh(make_icosphere(2));
  for (int k = 0; k < 10; ++k) {
    const auto q = random_rotation(rng);
    EXPECT_EQ(render_silhouette(mesh, q, cam),
              render_silhouette(rotate_mesh(mesh, q), UnitQuaternion::identity(), cam));
  }
}

TEST(Render, ThreadCountDoesNotChangeOutput) {
  const CameraModel cam;
  const auto mesh = normalize_mesh(make_icosphere(3));
  const auto q = UnitQuaternion::from_axis_angle(Vec3(1, 2, 3), 0.7);
  set_thread_count(1);
  const auto a = render_silhouette(mesh, q, cam);
  set_thread_count(7);
  const auto b = render_silhouette(mesh, q, cam);
  set_thread_count(1);
  EXPECT_EQ(a, b);
}

TEST(Contour, FullFrameRing) {
  const Silhouette s(16, 12, 1);
  const auto px = extract_contour_pixels(s);
  EXPECT_EQ(px.size(), 2u * 16 + 2u * 12 - 4);
  for (const auto& p : px) {
    EXPECT_TRUE(p.row == 0 || p.col == 0 || p.row == 11 || p.col == 15);
  }
}

TEST(Contour, SinglePixelAndSquare) {
  Silhouette one(8, 8);
  one.at(3, 4) = 1;
  const auto px = extract_contour_pixels(one);
  ASSERT_EQ(px.size(), 1u);
  EXPECT_EQ(px[0], (Pixel{3, 4}));
  EXPECT_EQ(extract_contour_pixels(square(32, 32, 5, 7, 10)).size(), 36u);
  EXPECT_EQ(code_of([] { extract_contour_pixels(Silhouette(8, 8)); }), ErrorCode::kEmptySilhouette);
}

TEST(Contour, RandomMasksMatchNeighborDefinition) {
  std::mt19937_64 rng(13);
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 20; ++trial) {
    Silhouette s(24, 20);
    for (auto& m : s.mask) m = coin(rng);
    const auto px = extract_contour_pixels(s);
    Silhouette marked(24, 20);
    for (const auto& p : px) marked.at(p.row, p.col) = 1;
    for (int r = 0; r < 20; ++r) {
      for (int c = 0; c < 24; ++c) {
        const auto bg = [&](int rr, int cc) { return !s.contains(rr, cc) || !s.at(rr, cc); };
        const bool expected =
            s.at(r, c) && (bg(r - 1, c) || bg(r + 1, c) || bg(r, c - 1) || bg(r, c + 1));
        EXPECT_EQ(marked.at(r, c), expected ? 1 : 0);
      }
    }
  }
}

TEST(DistanceTransform, MatchesBruteForce) {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> pos(0, 63), count(1, 60);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Pixel> seeds;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) seeds.push_back({pos(rng), pos(rng)});
    const auto f = distance_transform(seeds, 64, 64);
    const auto ref = oracle::brute_distance(seeds, 64, 64);
    for (std::size_t k = 0; k < ref.size(); ++k) ASSERT_NEAR(f.dist[k], ref[k], 1e-9);
    for (const auto& s : seeds) EXPECT_EQ(f.at(s.row, s.col), 0.0);
  }
}

TEST(DistanceTransform, LipschitzOnRectangularImage) {
  std::mt19937_64 rng(15);
  std::vector<Pixel> seeds{{0, 0}, {30, 70}, {11, 40}};
  const auto f = distance_transform(seeds, 80, 33);
  for (int r = 0; r < 33; ++r) {
    for (int c = 0; c < 80; ++c) {
      if (c + 1 < 80) EXPECT_LE(std::abs(f.at(r, c) - f.at(r, c + 1)), 1.0 + 1e-12);
      if (r + 1 < 33) EXPECT_LE(std::abs(f.at(r, c) - f.at(r + 1, c)), 1.0 + 1e-12);
    }
  }
  const auto ref = oracle::brute_distance(seeds, 80, 33);
  for (std::size_t k = 0; k < ref.size(); ++k) ASSERT_NEAR(f.dist[k], ref[k], 1e-9);
}

TEST(DistanceTransform, EdgeCases) {
  std::vector<Pixel> all;
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) all.push_back({r, c});
  for (double d : distance_transform(all, 6, 5).dist) EXPECT_EQ(d, 0.0);
  const auto one = distance_transform({{2, 2}}, 5, 5);
  EXPECT_EQ(one.at(2, 4), 2.0);
  EXPECT_DOUBLE_EQ(one.at(0, 0), std::sqrt(8.0));
  EXPECT_EQ(code_of([] { distance_transform({}, 4, 4); }), ErrorCode::kNoSeeds);
}

TEST(Bilinear, Examples) {
  DistanceField f{3, 2, {0, 2, 4, 1, 5, 9}};
  EXPECT_EQ(sample_field_bilinear(f, 2, 1), 9.0);
  EXPECT_EQ(sample_field_bilinear(f, 0, 0), 0.0);
  EXPECT_EQ(sample_field_bilinear(f, 1.5, 0), 3.0);
  EXPECT_EQ(sample_field_bilinear(f, -50, 1), 1.0);
  EXPECT_EQ(sample_field_bilinear(f, -50, 0.5), 0.5);
  EXPECT_EQ(sample_field_bilinear(f, 99, 99), 9.0);
}

TEST(Lifting, CubeCornersGiveTheFrontFour) {
  const CameraModel cam;
  const auto cube = make_cube();
  const Silhouette s = render_silhouette(cube, UnitQuaternion::identity(), cam);
  const PointCloud corners{cube.vertices};
  const auto lifted = lift_contour_points(corners, UnitQuaternion::identity(), cam, s, 200, 1);
  // back corners project to 63.5 +- 31.1 px, well inside the square
  ASSERT_EQ(lifted.points.size(), 4u);
  for (const auto& p : lifted.points) {
    EXPECT_NEAR(p.z(), 1.7, 1e-12);
    EXPECT_NEAR(std::abs(p.x()), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(p.y()), 0.5, 1e-12);
  }
}

TEST(Lifting, CardinalityAndErrors) {
  const CameraModel cam;
  const auto mesh = normalize_mesh(make_icosphere(2));
  const auto q = UnitQuaternion::from_axis_angle(Vec3(0, 1, 0), 0.3);
  const Silhouette s = render_silhouette(mesh, q, cam);
  const auto cloud = sample_surface(mesh, 4000, 5);
  const auto a = lift_contour_points(cloud, q, cam, s, 1, 9);
  const auto b = lift_contour_points(cloud, q, cam, s, 1, 9);
  ASSERT_EQ(a.points.size(), 1u);
  EXPECT_EQ(a.points[0], b.points[0]);
  EXPECT_LE(lift_contour_points(cloud, q, cam, s, 50, 3).points.size(), 50u);

  const PointCloud center{{Vec3::Zero()}};
  EXPECT_EQ(code_of([&] { lift_contour_points(center, q, cam, s, 10, 0); }),
            ErrorCode::kNoContourPoints);
  EXPECT_EQ(code_of([&] { lift_contour_points(PointCloud{}, q, cam, s, 10, 0); }),
            ErrorCode::kEmptyCloud);
}

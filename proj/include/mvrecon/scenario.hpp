#pragma once

// Synthetic experiments: view sampling, silhouette rendering, the relative
// pose noise model that stands in for a learned pose predictor, scenario
// directories on disk and the end-to-end pipeline.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "mvrecon/carve.hpp"
#include "mvrecon/error.hpp"
#include "mvrecon/eval.hpp"
#include "mvrecon/geometry.hpp"
#include "mvrecon/io.hpp"
#include "mvrecon/losses.hpp"
#include "mvrecon/mesh.hpp"
#include "mvrecon/posegraph.hpp"
#include "mvrecon/raster.hpp"

namespace mvrecon {

inline constexpr std::size_t kSurfaceSampleCount = 8192;
inline constexpr std::size_t kContourMaxPoints = 200;

struct ScenarioConfig {
  std::string mesh_path;
  int n_views = 5;
  std::uint64_t seed = 0;
  std::pair<double, double> azimuth_range{0.0, 360.0};
  std::pair<double, double> elevation_range{-20.0, 40.0};
  double noise_max_deg = 10.0;
  double w1 = 0.4;
  double carve_tau = 0.85;
  int resolution = 32;
  std::optional<CameraModel> camera;

  void validate() const {
    if (mesh_path.empty()) throw Error(ErrorCode::kInvalidArgument, "mesh_path is required");
    if (n_views < 2) throw Error(ErrorCode::kInvalidArgument, "n_views must be >= 2");
    const auto [az0, az1] = azimuth_range;
    const auto [el0, el1] = elevation_range;
    if (az0 < 0.0 || az1 > 360.0 || az0 > az1) {
      throw Error(ErrorCode::kInvalidArgument, "azimuth_range must lie within [0, 360]");
    }
    if (el0 < -90.0 || el1 > 90.0 || el0 > el1) {
      throw Error(ErrorCode::kInvalidArgument, "elevation_range must lie within [-90, 90]");
    }
    if (!(noise_max_deg >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_max_deg must be >= 0");
    if (!(w1 > 0.0 && w1 < 1.0)) throw Error(ErrorCode::kInvalidWeight, "w1 must lie in (0, 1)");
    if (!(carve_tau > 0.0 && carve_tau < 1.0)) {
      throw Error(ErrorCode::kInvalidThreshold, "carve_tau must lie in (0, 1)");
    }
    if (resolution < 2) throw Error(ErrorCode::kInvalidArgument, "resolution must be >= 2");
    if (camera) camera->validate();
  }
};

/// Materialized experiment state. Rotations map the normalized object frame
/// to each view's camera frame (before adding t*).
struct Scenario {
  TriangleMesh mesh;
  CameraModel camera;
  std::uint64_t seed = 0;
  std::vector<UnitQuaternion> rotations;
  std::vector<Silhouette> silhouettes;
  PointCloud cloud;

  int n_views() const { return static_cast<int>(rotations.size()); }

  /// Ground-truth relative rotation q_j q_i^-1 from view i to view j.
  UnitQuaternion true_relative(int i, int j) const { return rotations[j] * rotations[i].inverse(); }

  std::vector<RelativePose> true_relatives() const {
    std::vector<RelativePose> out;
    for (int i = 0; i < n_views(); ++i) {
      for (int j = 0; j < n_views(); ++j) {
        if (i != j) out.push_back({i, j, true_relative(i, j)});
      }
    }
    return out;
  }
};

/// Independent stream seed for a named stage of a seeded experiment.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t { kViewStream = 1, kCloudStream = 2, kNoiseStream = 3, kContourStream = 4 };

/// Loads a mesh path. `builtin:cube`, `builtin:icosahedron` and
/// `builtin:sphere` name generated meshes.
inline TriangleMesh load_mesh(const std::string& path) {
  if (path == "builtin:cube") return make_cube();
  if (path == "builtin:icosahedron") return make_icosahedron();
  if (path == "builtin:sphere") return make_icosphere(3);
  return io::read_obj(path);
}

/// Renders a scenario from explicit ground-truth rotations.
inline Scenario make_scenario(const TriangleMesh& mesh, const std::vector<UnitQuaternion>& rotations,
                              const CameraModel& camera, std::uint64_t seed) {
  Scenario sc;
  sc.mesh = normalize_mesh(mesh);
  sc.camera = camera;
  sc.seed = seed;
  sc.rotations = rotations;
  sc.silhouettes.reserve(rotations.size());
  for (const auto& q : rotations) sc.silhouettes.push_back(render_silhouette(sc.mesh, q, camera));
  sc.cloud = sample_surface(sc.mesh, kSurfaceSampleCount, derive_seed(seed, kCloudStream));
  return sc;
}

inline Scenario generate_views(const ScenarioConfig& cfg, const TriangleMesh& mesh) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(cfg.seed, kViewStream));
  std::vector<UnitQuaternion> rotations;
  for (int k = 0; k < cfg.n_views; ++k) {
    rotations.push_back(
        view_rotation_to_quat(sample_view_rotation(rng, cfg.azimuth_range, cfg.elevation_range)));
  }
  return make_scenario(mesh, rotations, cfg.camera.value_or(CameraModel{}), cfg.seed);
}

inline Scenario generate_views(const ScenarioConfig& cfg) {
  cfg.validate();
  return generate_views(cfg, load_mesh(cfg.mesh_path));
}

/// Left-multiplies every directed ground-truth relative by an independent
/// random rotation (axis uniform on the sphere, angle uniform in
/// [0, noise_max_deg]). Edges (i, j) and (j, i) get unrelated noise.
inline RelativePoseGraph perturb_relative_poses(const Scenario& sc, double noise_max_deg,
                                                std::uint64_t seed) {
  if (!(noise_max_deg >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::vector<RelativePose> edges = sc.true_relatives();
  if (noise_max_deg > 0.0) {
    const double max_angle = deg_to_rad(noise_max_deg);
    for (auto& e : edges) e.q = random_bounded_rotation(rng, max_angle) * e.q;
  }
  return build_graph(sc.n_views(), edges);
}

// ---------------------------------------------------------------- scenario dirs

inline std::string view_file_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "view_%03d.pgm", k);
  return buf;
}

inline nlohmann::json camera_to_json(const CameraModel& cam) {
  return {{"focal_length", cam.focal_length},
          {"principal_point", {cam.cx, cam.cy}},
          {"image_size", {cam.width, cam.height}},
          {"translation", {cam.translation.x(), cam.translation.y(), cam.translation.z()}}};
}

inline CameraModel camera_from_json(const nlohmann::json& j) {
  try {
    CameraModel cam;
    cam.focal_length = j.value("focal_length", cam.focal_length);
    if (j.contains("image_size")) {
      cam.width = j.at("image_size").at(0).get<int>();
      cam.height = j.at("image_size").at(1).get<int>();
      cam.cx = 0.5 * (cam.width - 1);
      cam.cy = 0.5 * (cam.height - 1);
    }
    if (j.contains("principal_point")) {
      cam.cx = j.at("principal_point").at(0).get<double>();
      cam.cy = j.at("principal_point").at(1).get<double>();
    }
    if (j.contains("translation")) {
      const auto& t = j.at("translation");
      cam.translation = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
    }
    cam.validate();
    return cam;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("camera JSON: ") + e.what());
  }
}

/// Layout: scenario.json, poses.json (ground-truth absolutes), mesh.obj
/// (normalized), cloud.xyz (surface samples) and view_NNN.pgm.
inline void write_scenario(const std::filesystem::path& dir, const Scenario& sc) {
  std::filesystem::create_directories(dir);
  nlohmann::json views = nlohmann::json::array();
  for (int k = 0; k < sc.n_views(); ++k) {
    io::write_pgm(dir / view_file_name(k), sc.silhouettes[k]);
    views.push_back(view_file_name(k));
  }
  io::write_json(dir / "scenario.json", {{"n_views", sc.n_views()},
                                         {"seed", sc.seed},
                                         {"camera", camera_to_json(sc.camera)},
                                         {"mesh", "mesh.obj"},
                                         {"cloud", "cloud.xyz"},
                                         {"silhouettes", views}});
  AbsolutePoseSet truth;
  truth.rotations = sc.rotations;
  io::write_json(dir / "poses.json", io::poses_to_json(truth));
  io::write_obj(dir / "mesh.obj", sc.mesh);
  io::write_xyz(dir / "cloud.xyz", sc.cloud);
}

inline Scenario read_scenario(const std::filesystem::path& dir) {
  const auto meta = io::read_json(dir / "scenario.json");
  Scenario sc;
  try {
    sc.seed = meta.at("seed").get<std::uint64_t>();
    sc.camera = camera_from_json(meta.at("camera"));
    sc.mesh = io::read_obj(dir / meta.at("mesh").get<std::string>());
    sc.cloud = io::read_xyz(dir / meta.at("cloud").get<std::string>());
    for (const auto& name : meta.at("silhouettes")) {
      sc.silhouettes.push_back(io::read_pgm(dir / name.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("scenario.json: ") + e.what());
  }
  sc.rotations = io::poses_from_json(io::read_json(dir / "poses.json")).rotations;
  if (sc.rotations.size() != sc.silhouettes.size()) {
    throw Error(ErrorCode::kLengthMismatch, "scenario pose and silhouette counts differ");
  }
  return sc;
}

// ---------------------------------------------------------------- config JSON

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  try {
    ScenarioConfig cfg;
    cfg.mesh_path = j.at("mesh_path").get<std::string>();
    cfg.n_views = j.value("n_views", cfg.n_views);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("azimuth_range")) {
      cfg.azimuth_range = {j["azimuth_range"].at(0).get<double>(), j["azimuth_range"].at(1).get<double>()};
    }
    if (j.contains("elevation_range")) {
      cfg.elevation_range = {j["elevation_range"].at(0).get<double>(),
                             j["elevation_range"].at(1).get<double>()};
    }
    cfg.noise_max_deg = j.value("noise_max_deg", cfg.noise_max_deg);
    cfg.w1 = j.value("w1", cfg.w1);
    cfg.carve_tau = j.value("carve_tau", cfg.carve_tau);
    cfg.resolution = j.value("resolution", cfg.resolution);
    if (j.contains("camera") && !j["camera"].is_null()) cfg.camera = camera_from_json(j["camera"]);
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config JSON: ") + e.what());
  }
}

inline nlohmann::json config_to_json(const ScenarioConfig& cfg) {
  nlohmann::json j = {{"mesh_path", cfg.mesh_path},
                      {"n_views", cfg.n_views},
                      {"seed", cfg.seed},
                      {"azimuth_range", {cfg.azimuth_range.first, cfg.azimuth_range.second}},
                      {"elevation_range", {cfg.elevation_range.first, cfg.elevation_range.second}},
                      {"noise_max_deg", cfg.noise_max_deg},
                      {"w1", cfg.w1},
                      {"carve_tau", cfg.carve_tau},
                      {"resolution", cfg.resolution}};
  if (cfg.camera) j["camera"] = camera_to_json(*cfg.camera);
  return j;
}

// ---------------------------------------------------------------- stages

/// Carves in the reference-view frame given absolute rotations gauge-fixed
/// to view 0.
inline OccupancyGrid carve_scenario(const Scenario& sc, const std::vector<UnitQuaternion>& rotations,
                                    double w1, int resolution) {
  GridSpec spec;
  spec.resolution = resolution;
  return build_occupancy(sc.silhouettes, rotations, sc.camera, spec, make_weights(sc.n_views(), w1));
}

/// Pose metrics over every ordered pair, predicted relatives taken from
/// `poses`.
inline PoseMetrics relative_pose_metrics(const Scenario& sc, const AbsolutePoseSet& poses) {
  if (static_cast<int>(poses.rotations.size()) != sc.n_views()) {
    throw Error(ErrorCode::kLengthMismatch, "pose count differs from scenario view count");
  }
  std::vector<UnitQuaternion> predicted, truth;
  for (int i = 0; i < sc.n_views(); ++i) {
    for (int j = 0; j < sc.n_views(); ++j) {
      if (i == j) continue;
      predicted.push_back(relative_from_absolute(poses, i, j));
      truth.push_back(sc.true_relative(i, j));
    }
  }
  return pose_metrics(predicted, truth);
}

/// IoU against the solid voxelization and Chamfer against the surface
/// samples, both reoriented into the reference view (view 0).
inline MetricReport evaluate_reconstruction(const BinaryGrid& predicted, const Scenario& sc,
                                            const AbsolutePoseSet& poses) {
  MetricReport report;
  const UnitQuaternion& reference = sc.rotations.front();
  report.iou = iou(predicted, voxelize_solid(sc.mesh, reference, predicted.spec));
  report.chamfer_x100 = chamfer(grid_to_cloud(predicted), rotate_cloud(sc.cloud, reference));
  const PoseMetrics pm = relative_pose_metrics(sc, poses);
  report.pose_accuracy = pm.accuracy;
  report.pose_median_deg = pm.median_error_deg;
  return report;
}

struct PairLoss {
  int source;
  int target;
  double angular;
  double contour;
  double pose;
};

/// Angular, contour and combined losses for every ordered view pair, the
/// prediction being the relative rotation implied by `poses`.
inline std::vector<PairLoss> evaluate_pair_losses(const Scenario& sc, const AbsolutePoseSet& poses,
                                                  const LossWeights& weights) {
  weights.validate();
  if (static_cast<int>(poses.rotations.size()) != sc.n_views()) {
    throw Error(ErrorCode::kLengthMismatch, "pose count differs from scenario view count");
  }
  std::vector<DistanceField> fields;
  std::vector<ContourPointSet> contours;
  for (int t = 0; t < sc.n_views(); ++t) {
    const auto& sil = sc.silhouettes[t];
    fields.push_back(distance_transform(extract_contour_pixels(sil), sil.width, sil.height));
    contours.push_back(lift_contour_points(sc.cloud, sc.rotations[t], sc.camera, sil,
                                           kContourMaxPoints,
                                           derive_seed(sc.seed, kContourStream + 16 * t)));
  }
  std::vector<PairLoss> out;
  for (int s = 0; s < sc.n_views(); ++s) {
    for (int t = 0; t < sc.n_views(); ++t) {
      if (s == t) continue;
      const UnitQuaternion q_star = sc.true_relative(s, t);
      const UnitQuaternion q_tilde = relative_from_absolute(poses, s, t);
      PairLoss row{s, t, angular_loss(q_star, q_tilde),
                   contour_loss(q_tilde, q_star, fields[t], contours[t], sc.camera, true), 0.0};
      row.pose = weights.alpha * row.angular + weights.beta * row.contour;
      out.push_back(row);
    }
  }
  return out;
}

/// Error raised by run_pipeline, naming the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "' failed: " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  MetricReport report;
  AbsolutePoseSet raw;        // star-tree start
  AbsolutePoseSet rectified;
};

/// generate -> perturb -> rectify -> carve -> binarize + cleanup -> eval,
/// writing every intermediate artifact under `out_dir`:
///   scenario/  graph.json  poses.json  occupancy.voxg  final.voxg  report.json
inline PipelineResult run_pipeline(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e);
    } catch (const std::exception& e) {
      throw StageError(name, Error(ErrorCode::kIoError, e.what()));
    }
  };
  stage("config", [&] {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    io::write_json(out_dir / "config.json", config_to_json(cfg));
    return 0;
  });
  const Scenario sc = stage("generate", [&] {
    Scenario s = generate_views(cfg);
    write_scenario(out_dir / "scenario", s);
    return s;
  });
  const RelativePoseGraph graph = stage("perturb", [&] {
    auto g = perturb_relative_poses(sc, cfg.noise_max_deg, derive_seed(cfg.seed, kNoiseStream));
    io::write_json(out_dir / "graph.json", io::graph_to_json(g));
    return g;
  });
  PipelineResult result;
  result.raw = initialize_absolute(graph);
  result.rectified = stage("rectify", [&] {
    auto p = rectify(graph);
    io::write_json(out_dir / "poses.json", io::poses_to_json(p));
    return p;
  });
  const OccupancyGrid occupancy = stage("carve", [&] {
    auto g = carve_scenario(sc, result.rectified.rotations, cfg.w1, cfg.resolution);
    io::write_file(out_dir / "occupancy.voxg", io::encode_voxg(g));
    return g;
  });
  const BinaryGrid final_grid = stage("binarize", [&] {
    auto b = cleanup(binarize(occupancy, cfg.carve_tau));
    io::write_file(out_dir / "final.voxg", io::encode_voxg(b));
    return b;
  });
  result.report = stage("eval", [&] {
    auto r = evaluate_reconstruction(final_grid, sc, result.rectified);
    io::write_json(out_dir / "report.json", io::report_to_json(r));
    return r;
  });
  return result;
}

}  // namespace mvrecon

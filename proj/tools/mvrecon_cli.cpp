// Command-line front end: scenario rendering, pose perturbation and
// rectification, carving, binarization, evaluation and the full pipeline.
//
// Exit codes: 0 success, 2 validation error, 1 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mvrecon/mvrecon.hpp"

namespace fs = std::filesystem;
using namespace mvrecon;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

int cmd_render(const std::string& mesh_path, int views, std::uint64_t seed, const fs::path& out) {
  ScenarioConfig cfg;
  cfg.mesh_path = mesh_path;
  cfg.n_views = views;
  cfg.seed = seed;
  const Scenario sc = generate_views(cfg);
  write_scenario(out, sc);
  std::cout << "wrote " << sc.n_views() << " silhouettes to " << out.string() << "\n";
  return 0;
}

int cmd_perturb(const fs::path& scenario_dir, double noise_deg, std::uint64_t seed,
                const fs::path& out) {
  const Scenario sc = read_scenario(scenario_dir);
  const RelativePoseGraph g = perturb_relative_poses(sc, noise_deg, seed);
  io::write_json(out, io::graph_to_json(g));
  return 0;
}

int cmd_rectify(const fs::path& graph_path, const fs::path& out, const RectifyOptions& opts) {
  const RelativePoseGraph g = io::graph_from_json(io::read_json(graph_path));
  const AbsolutePoseSet p = rectify(g, opts);
  io::write_json(out, io::poses_to_json(p));
  std::cout << "residual " << io::format_double(p.residual) << " after " << p.iterations
            << " iterations\n";
  return 0;
}

int cmd_carve(const fs::path& scenario_dir, const fs::path& poses_path, double w1, int res,
              const fs::path& out) {
  const Scenario sc = read_scenario(scenario_dir);
  const AbsolutePoseSet poses = io::poses_from_json(io::read_json(poses_path));
  if (static_cast<int>(poses.rotations.size()) != sc.n_views()) {
    throw Error(ErrorCode::kLengthMismatch, "pose count differs from scenario view count");
  }
  io::write_file(out, io::encode_voxg(carve_scenario(sc, poses.rotations, w1, res)));
  return 0;
}

int cmd_binarize(const fs::path& grid_path, double tau, bool with_cleanup, const fs::path& out) {
  const OccupancyGrid grid = io::decode_voxg_real(io::read_file(grid_path));
  BinaryGrid bits = binarize(grid, tau);
  if (with_cleanup) bits = cleanup(bits);
  io::write_file(out, io::encode_voxg(bits));
  return 0;
}

int cmd_eval(const fs::path& pred_path, const fs::path& scenario_dir, const std::string& poses_path,
             const fs::path& out) {
  const BinaryGrid pred = io::decode_voxg_binary(io::read_file(pred_path));
  const Scenario sc = read_scenario(scenario_dir);
  AbsolutePoseSet poses;
  if (poses_path.empty()) {
    poses.rotations = sc.rotations;
  } else {
    poses = io::poses_from_json(io::read_json(poses_path));
  }
  const MetricReport report = evaluate_reconstruction(pred, sc, poses);
  io::write_json(out, io::report_to_json(report));
  std::cout << io::report_to_json(report).dump() << "\n";
  return 0;
}

int cmd_eval_loss(const fs::path& scenario_dir, const fs::path& poses_path, double alpha,
                  double beta) {
  const Scenario sc = read_scenario(scenario_dir);
  const AbsolutePoseSet poses = io::poses_from_json(io::read_json(poses_path));
  const auto rows = evaluate_pair_losses(sc, poses, LossWeights{alpha, beta});
  std::printf("source target angular contour pose\n");
  for (const auto& r : rows) {
    std::printf("%d %d %.9f %.9f %.9f\n", r.source, r.target, r.angular, r.contour, r.pose);
  }
  return 0;
}

int cmd_pipeline(const fs::path& config_path, const fs::path& out) {
  ScenarioConfig cfg = config_from_json(io::read_json(config_path));
  if (cfg.mesh_path.rfind("builtin:", 0) != 0 && fs::path(cfg.mesh_path).is_relative()) {
    cfg.mesh_path = (config_path.parent_path() / cfg.mesh_path).lexically_normal().string();
  }
  const PipelineResult result = run_pipeline(cfg, out);
  std::cout << io::report_to_json(result.report).dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view silhouette reconstruction toolkit"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for data-parallel loops (0 = all cores)");

  std::string mesh, scenario, out, graph, poses, grid, pred, config;
  int views = 5, res = 32;
  std::uint64_t seed = 0;
  double noise = 10.0, w1 = 0.4, tau = 0.85, alpha = 0.1, beta = 0.9;
  bool with_cleanup = false;
  RectifyOptions ropts;

  auto* render = app.add_subcommand("render", "Render silhouettes of a mesh from random views");
  render->add_option("--mesh", mesh, "OBJ mesh or builtin:cube|icosahedron|sphere")->required();
  render->add_option("--views", views, "Number of views")->check(CLI::PositiveNumber);
  render->add_option("--seed", seed, "Random seed");
  render->add_option("--out", out, "Scenario output directory")->required();

  auto* perturb = app.add_subcommand("perturb", "Build a noisy relative pose graph");
  perturb->add_option("--scenario", scenario)->required();
  perturb->add_option("--noise-deg", noise, "Maximum noise angle in degrees")->check(CLI::NonNegativeNumber);
  perturb->add_option("--seed", seed);
  perturb->add_option("--out", out)->required();

  auto* rect = app.add_subcommand("rectify", "Rectify a relative pose graph into absolute poses");
  rect->add_option("--graph", graph)->required();
  rect->add_option("--out", out)->required();
  rect->add_option("--max-iter", ropts.max_iterations)->check(CLI::PositiveNumber);
  rect->add_option("--tol", ropts.tolerance)->check(CLI::PositiveNumber);

  auto* carve = app.add_subcommand("carve", "Build the weighted occupancy grid");
  carve->add_option("--scenario", scenario)->required();
  carve->add_option("--poses", poses)->required();
  carve->add_option("--w1", w1, "Reference view weight");
  carve->add_option("--res", res, "Grid resolution")->check(CLI::Range(2, 512));
  carve->add_option("--out", out)->required();

  auto* bin = app.add_subcommand("binarize", "Threshold an occupancy grid");
  bin->add_option("--grid", grid)->required();
  bin->add_option("--tau", tau, "Threshold in (0, 1)");
  bin->add_flag("--cleanup", with_cleanup, "Apply closing and keep the largest component");
  bin->add_option("--out", out)->required();

  auto* ev = app.add_subcommand("eval", "Score a binary grid against the scenario ground truth");
  ev->add_option("--pred", pred)->required();
  ev->add_option("--scenario", scenario)->required();
  ev->add_option("--poses", poses, "Rectified poses for pose metrics (default: ground truth)");
  ev->add_option("--out", out)->required();

  auto* evl = app.add_subcommand("eval-loss", "Print angular, contour and combined losses per pair");
  evl->add_option("--scenario", scenario)->required();
  evl->add_option("--pose-file", poses)->required();
  evl->add_option("--alpha", alpha);
  evl->add_option("--beta", beta);

  auto* pipe = app.add_subcommand("pipeline", "Run every stage from a JSON config");
  pipe->add_option("--config", config)->required();
  pipe->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    set_thread_count(threads);
    if (*render) return cmd_render(mesh, views, seed, out);
    if (*perturb) return cmd_perturb(scenario, noise, seed, out);
    if (*rect) return cmd_rectify(graph, out, ropts);
    if (*carve) return cmd_carve(scenario, poses, w1, res, out);
    if (*bin) return cmd_binarize(grid, tau, with_cleanup, out);
    if (*ev) return cmd_eval(pred, scenario, poses, out);
    if (*evl) return cmd_eval_loss(scenario, poses, alpha, beta);
    if (*pipe) return cmd_pipeline(config, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

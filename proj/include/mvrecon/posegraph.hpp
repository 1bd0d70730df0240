#pragma once

// Fully-connected relative pose graph and its algebraic rectification into
// absolute rotations:
//
//   min over q_1..q_{n-1}  sum_{i != j} || R(q_j) R(q_i)^T - R(q~_ij) ||_F^2
//
// with view 0 pinned to the identity. Solved by Levenberg-Marquardt on a
// 3-dof tangent parameterization per view (left multiplicative retraction),
// normal equations factorized with a dense Cholesky.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mvrecon/error.hpp"
#include "mvrecon/geometry.hpp"

namespace mvrecon {

/// Directed relative rotation prediction: q maps view i's frame to view j's.
struct RelativePose {
  int i;
  int j;
  UnitQuaternion q;
};

class RelativePoseGraph {
 public:
  RelativePoseGraph() = default;

  int n_views() const { return n_; }
  std::size_t edge_count() const { return static_cast<std::size_t>(n_) * (n_ - 1); }

  const UnitQuaternion& edge(int i, int j) const {
    check_pair(i, j);
    return edges_[static_cast<std::size_t>(i) * n_ + j];
  }

  /// All edges in (i, j) lexicographic order.
  std::vector<RelativePose> edges() const {
    std::vector<RelativePose> out;
    out.reserve(edge_count());
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i != j) out.push_back({i, j, edge(i, j)});
      }
    }
    return out;
  }

  friend RelativePoseGraph build_graph(int n, const std::vector<RelativePose>& predictions);

 private:
  void check_pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "edge (" + std::to_string(i) + ", " + std::to_string(j) + ") not in graph");
    }
  }

  int n_ = 0;
  std::vector<UnitQuaternion> edges_;
};

/// Builds a complete bidirectional graph over views 0..n-1. Every ordered
/// pair must appear exactly once.
inline RelativePoseGraph build_graph(int n, const std::vector<RelativePose>& predictions) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "a pose graph needs at least 2 views");
  RelativePoseGraph g;
  g.n_ = n;
  g.edges_.assign(static_cast<std::size_t>(n) * n, UnitQuaternion::identity());
  std::vector<char> present(static_cast<std::size_t>(n) * n, 0);
  for (const auto& e : predictions) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n || e.i == e.j) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ") invalid for " +
                      std::to_string(n) + " views");
    }
    const std::size_t k = static_cast<std::size_t>(e.i) * n + e.j;
    if (present[k]) {
      throw Error(ErrorCode::kDuplicateEdge,
                  "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ") given twice");
    }
    present[k] = 1;
    g.edges_[k] = e.q;
  }
  std::ostringstream missing;
  int missing_count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || present[static_cast<std::size_t>(i) * n + j]) continue;
      missing << (missing_count++ ? ", " : "") << "(" << i << ", " << j << ")";
    }
  }
  if (missing_count) {
    throw Error(ErrorCode::kIncompleteGraph, "missing edges: " + missing.str());
  }
  return g;
}

struct AbsolutePoseSet {
  std::vector<UnitQuaternion> rotations;  // rotations[0] is the identity
  double residual = 0.0;
  int iterations = 0;
  /// Objective at the start point followed by each accepted step.
  std::vector<double> objective_history;
};

struct RectifyOptions {
  int max_iterations = 100;
  double tolerance = 1e-12;
  double initial_damping = 1e-4;

  void validate() const {
    if (max_iterations <= 0 || !(tolerance > 0.0) || !(initial_damping > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "rectify options must all be positive");
    }
  }
};

/// The rectification objective, summed edge by edge in (i, j) order.
inline double rectify_objective(const RelativePoseGraph& g,
                                const std::vector<UnitQuaternion>& rotations) {
  const int n = g.n_views();
  if (static_cast<int>(rotations.size()) != n) {
    throw Error(ErrorCode::kLengthMismatch, "rotation count differs from graph size");
  }
  std::vector<RotationMatrix> r(n);
  for (int k = 0; k < n; ++k) r[k] = rotations[k].to_matrix();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      total += (r[j] * r[i].transpose() - g.edge(i, j).to_matrix()).squaredNorm();
    }
  }
  return total;
}

/// Stacked 9-entry residual blocks (row-major matrix entries) in (i, j) order.
inline Eigen::VectorXd rectify_residuals(const RelativePoseGraph& g,
                                         const std::vector<UnitQuaternion>& rotations) {
  const int n = g.n_views();
  std::vector<RotationMatrix> r(n);
  for (int k = 0; k < n; ++k) r[k] = rotations[k].to_matrix();
  Eigen::VectorXd res(9 * g.edge_count());
  Eigen::Index row = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const RotationMatrix d = r[j] * r[i].transpose() - g.edge(i, j).to_matrix();
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) res(row++) = d(a, b);
      }
    }
  }
  return res;
}

namespace detail {
inline RotationMatrix hat(const Vec3& w) {
  RotationMatrix m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}
}  // namespace detail

/// Jacobian of rectify_residuals with respect to the tangent increments of
/// views 1..n-1, where view k moves as q_k <- exp(delta_k) q_k.
///   d/d delta_j of R_j R_i^T =  [e_a]x M
///   d/d delta_i of R_j R_i^T = -M [e_a]x        (M = R_j R_i^T)
inline Eigen::MatrixXd rectify_jacobian(const RelativePoseGraph& g,
                                        const std::vector<UnitQuaternion>& rotations) {
  const int n = g.n_views();
  std::vector<RotationMatrix> r(n);
  for (int k = 0; k < n; ++k) r[k] = rotations[k].to_matrix();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(9 * g.edge_count(), 3 * (n - 1));
  const RotationMatrix generators[3] = {detail::hat(Vec3::UnitX()), detail::hat(Vec3::UnitY()),
                                        detail::hat(Vec3::UnitZ())};
  Eigen::Index block = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const RotationMatrix m = r[j] * r[i].transpose();
      for (int a = 0; a < 3; ++a) {
        if (j > 0) {
          const RotationMatrix dj = generators[a] * m;
          for (int e = 0; e < 9; ++e) jac(block + e, 3 * (j - 1) + a) = dj(e / 3, e % 3);
        }
        if (i > 0) {
          const RotationMatrix di = -m * generators[a];
          for (int e = 0; e < 9; ++e) jac(block + e, 3 * (i - 1) + a) = di(e / 3, e % 3);
        }
      }
      block += 9;
    }
  }
  return jac;
}

/// Applies a stacked tangent increment to views 1..n-1.
inline std::vector<UnitQuaternion> retract(const std::vector<UnitQuaternion>& rotations,
                                           const Eigen::VectorXd& delta) {
  std::vector<UnitQuaternion> out = rotations;
  for (std::size_t k = 1; k < out.size(); ++k) {
    const Eigen::Index c = 3 * static_cast<Eigen::Index>(k - 1);
    out[k] = UnitQuaternion::exp(Vec3(delta(c), delta(c + 1), delta(c + 2))) * out[k];
  }
  return out;
}

/// Star-tree start: view 0 is the identity, view k takes the edge (0, k).
inline AbsolutePoseSet initialize_absolute(const RelativePoseGraph& g) {
  AbsolutePoseSet set;
  set.rotations.reserve(g.n_views());
  set.rotations.push_back(UnitQuaternion::identity());
  for (int k = 1; k < g.n_views(); ++k) set.rotations.push_back(g.edge(0, k));
  set.residual = rectify_objective(g, set.rotations);
  set.objective_history = {set.residual};
  return set;
}

inline AbsolutePoseSet rectify(const RelativePoseGraph& g, const RectifyOptions& opts = {}) {
  opts.validate();
  if (g.n_views() < 2) throw Error(ErrorCode::kIncompleteGraph, "graph has no edges");
  AbsolutePoseSet set = initialize_absolute(g);
  double cost = set.residual;
  double damping = opts.initial_damping;
  constexpr double kMaxDamping = 1e16;

  int iter = 0;
  while (iter < opts.max_iterations && cost > 0.0) {
    ++iter;
    const Eigen::MatrixXd jac = rectify_jacobian(g, set.rotations);
    const Eigen::VectorXd res = rectify_residuals(g, set.rotations);
    const Eigen::MatrixXd hessian = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * res;

    Eigen::MatrixXd damped = hessian;
    damped.diagonal().array() += damping;
    const Eigen::LLT<Eigen::MatrixXd> llt(damped);
    bool accepted = false;
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd step = llt.solve(-gradient);
      std::vector<UnitQuaternion> trial = retract(set.rotations, step);
      trial[0] = UnitQuaternion::identity();
      const double trial_cost = rectify_objective(g, trial);
      if (trial_cost < cost) {
        const double decrease = (cost - trial_cost) / cost;
        set.rotations = std::move(trial);
        cost = trial_cost;
        set.objective_history.push_back(cost);
        damping *= 0.5;
        accepted = true;
        if (decrease < opts.tolerance) break;
      }
    }
    if (!accepted) {
      damping *= 10.0;
      if (damping > kMaxDamping) break;
    }
  }
  set.residual = cost;
  set.iterations = iter;
  return set;
}

/// Relative rotation from view i to view j implied by the absolutes,
/// q_j q_i^-1. Computed once per unordered pair so that (i, j) and (j, i)
/// are exact inverses of each other.
inline UnitQuaternion relative_from_absolute(const AbsolutePoseSet& poses, int i, int j) {
  const int n = static_cast<int>(poses.rotations.size());
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "view pair (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
  }
  if (i == j) return UnitQuaternion::identity();
  if (i > j) return relative_from_absolute(poses, j, i).inverse();
  return poses.rotations[j] * poses.rotations[i].inverse();
}

struct PoseMetrics {
  double accuracy = 0.0;
  double median_error_deg = 0.0;
};

/// Fraction of geodesic errors strictly below the threshold, and the lower
/// median of the errors, both in degrees.
inline PoseMetrics pose_metrics(const std::vector<UnitQuaternion>& predicted,
                                const std::vector<UnitQuaternion>& truth,
                                double threshold_deg = 30.0) {
  if (predicted.empty()) throw Error(ErrorCode::kEmptyInput, "no poses to evaluate");
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch, "predicted and truth lists differ in length");
  }
  std::vector<double> errors(predicted.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    errors[k] = rad_to_deg(geodesic_angle(predicted[k], truth[k]));
    if (errors[k] < threshold_deg) ++hits;
  }
  std::sort(errors.begin(), errors.end());
  return {static_cast<double>(hits) / static_cast<double>(errors.size()),
          errors[(errors.size() - 1) / 2]};
}

}  // namespace mvrecon

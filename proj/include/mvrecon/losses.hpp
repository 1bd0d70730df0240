#pragma once

// Relative-pose evaluation objectives: angular, contour and their weighted
// combination. These score a predicted relative rotation q_tilde against the
// ground truth q_star; no gradients are provided.

#include <cmath>

#include "mvrecon/error.hpp"
#include "mvrecon/geometry.hpp"
#include "mvrecon/raster.hpp"

namespace mvrecon {

struct LossWeights {
  double alpha = 0.1;
  double beta = 0.9;

  void validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || std::abs(alpha + beta - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidWeight, "loss weights must be non-negative and sum to 1");
    }
  }
};

/// 1 - |Re(q_star q_tilde^-1)| = 1 - cos(theta / 2). The absolute value
/// makes the loss blind to the q / -q double cover.
inline double angular_loss(const UnitQuaternion& q_star, const UnitQuaternion& q_tilde) {
  const UnitQuaternion d = q_star * q_tilde.inverse();
  return 1.0 - std::min(1.0, std::abs(d.w()));
}

/// Moves each target-frame contour point back to the source frame with the
/// true relative rotation and forward again with the predicted one, then
/// reads the target distance field at its projection. Mean over the points
/// when `normalize` is set, sum otherwise.
inline double contour_loss(const UnitQuaternion& q_tilde, const UnitQuaternion& q_star,
                           const DistanceField& target_field, const ContourPointSet& points,
                           const CameraModel& cam, bool normalize = true) {
  if (points.points.empty()) throw Error(ErrorCode::kEmptyContourSet, "no contour points");
  const Vec3& t = cam.translation;
  const UnitQuaternion star_inv = q_star.inverse();
  double total = 0.0;
  for (const auto& v : points.points) {
    const Vec3 source = star_inv.rotate(v - t);
    const Vec3 p = q_tilde.rotate(source) + t;
    const PixelCoord uv = project(cam, p);
    total += sample_field_bilinear(target_field, uv.u, uv.v);
  }
  return normalize ? total / static_cast<double>(points.points.size()) : total;
}

inline double pose_loss(const UnitQuaternion& q_star, const UnitQuaternion& q_tilde,
                        const DistanceField& target_field, const ContourPointSet& points,
                        const CameraModel& cam, const LossWeights& w = {}) {
  w.validate();
  return w.alpha * angular_loss(q_star, q_tilde) +
         w.beta * contour_loss(q_tilde, q_star, target_field, points, cam, true);
}

}  // namespace mvrecon

#pragma once

// Rotation algebra (Hamilton quaternions, scalar first, right-handed frames),
// the pinhole camera and view-rotation sampling shared by every stage.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "mvrecon/error.hpp"

namespace mvrecon {

using Vec3 = Eigen::Vector3d;
using RotationMatrix = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

class UnitQuaternion {
 public:
  UnitQuaternion() = default;

  /// Normalizes the given components. Throws on a zero-norm input.
  UnitQuaternion(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorCode::kInvalidArgument, "quaternion has zero or non-finite norm");
    }
    w_ = w / n;
    x_ = x / n;
    y_ = y / n;
    z_ = z / n;
  }

  static UnitQuaternion identity() { return {}; }

  /// Rotation of `angle` radians about `axis` (need not be unit length).
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rotation axis has zero length");
    const double s = std::sin(0.5 * angle) / n;
    return {std::cos(0.5 * angle), axis.x() * s, axis.y() * s, axis.z() * s};
  }

  /// Exponential map of a rotation vector (axis * angle).
  static UnitQuaternion exp(const Vec3& omega) {
    const double theta = omega.norm();
    if (theta < 1e-12) {
      return {1.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z()};
    }
    return from_axis_angle(omega, theta);
  }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  std::array<double, 4> coeffs() const { return {w_, x_, y_, z_}; }

  UnitQuaternion conjugate() const { return from_raw(w_, -x_, -y_, -z_); }
  UnitQuaternion inverse() const { return conjugate(); }
  UnitQuaternion operator-() const { return from_raw(-w_, -x_, -y_, -z_); }

  /// Hamilton product, re-normalized.
  friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
    return {a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
            a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
            a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
            a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_};
  }

  friend bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

  /// q p q^-1, expanded as p + 2w (u x p) + 2 u x (u x p).
  Vec3 rotate(const Vec3& p) const {
    const Vec3 u(x_, y_, z_);
    const Vec3 t = 2.0 * u.cross(p);
    return p + w_ * t + u.cross(t);
  }

  RotationMatrix to_matrix() const {
    const double ww = w_ * w_, xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
    const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
    const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
    RotationMatrix m;
    m << ww + xx - yy - zz, 2.0 * (xy - wz), 2.0 * (xz + wy),
        2.0 * (xy + wz), ww - xx + yy - zz, 2.0 * (yz - wx),
        2.0 * (xz - wy), 2.0 * (yz + wx), ww - xx - yy + zz;
    return m;
  }

 private:
  static UnitQuaternion from_raw(double w, double x, double y, double z) {
    UnitQuaternion q;
    q.w_ = w;
    q.x_ = x;
    q.y_ = y;
    q.z_ = z;
    return q;
  }

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

inline UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b) {
  return a * b;
}
inline UnitQuaternion quat_conjugate(const UnitQuaternion& q) { return q.conjugate(); }
inline Vec3 quat_rotate_point(const UnitQuaternion& q, const Vec3& p) { return q.rotate(p); }
inline RotationMatrix quat_to_matrix(const UnitQuaternion& q) { return q.to_matrix(); }

/// |Re(a b^-1)|, the cosine of half the relative rotation angle.
inline double half_angle_cosine(const UnitQuaternion& a, const UnitQuaternion& b) {
  const double re = a.w() * b.w() + a.x() * b.x() + a.y() * b.y() + a.z() * b.z();
  return std::clamp(std::abs(re), 0.0, 1.0);
}

/// Geodesic distance on SO(3) in radians, in [0, pi]. Invariant to q -> -q.
inline double geodesic_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
  return 2.0 * std::acos(half_angle_cosine(a, b));
}

/// Uniform rotation on SO(3) from three uniform scalars (subgroup algorithm).
template <typename Rng>
UnitQuaternion random_rotation(Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  return {b * std::cos(2.0 * kPi * u3), a * std::sin(2.0 * kPi * u2),
          a * std::cos(2.0 * kPi * u2), b * std::sin(2.0 * kPi * u3)};
}

/// Axis uniform on the sphere, angle uniform in [0, max_angle] radians.
template <typename Rng>
UnitQuaternion random_bounded_rotation(Rng& rng, double max_angle) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Vec3 axis;
  do {
    axis = Vec3(gauss(rng), gauss(rng), gauss(rng));
  } while (axis.norm() < 1e-12);
  return UnitQuaternion::from_axis_angle(axis, max_angle * uni(rng));
}

struct CameraModel {
  double focal_length = 140.0;
  double cx = 63.5;  // pixel centers sit at integer coordinates
  double cy = 63.5;
  int width = 128;
  int height = 128;
  Vec3 translation = Vec3(0.0, 0.0, 2.2);

  /// Principal point at the image center for a given size.
  static CameraModel centered(int width, int height, double focal_length, const Vec3& t) {
    CameraModel cam;
    cam.width = width;
    cam.height = height;
    cam.focal_length = focal_length;
    cam.cx = 0.5 * (width - 1);
    cam.cy = 0.5 * (height - 1);
    cam.translation = t;
    return cam;
  }

  void validate() const {
    if (!(focal_length > 0.0)) throw Error(ErrorCode::kInvalidArgument, "focal_length must be > 0");
    if (width < 8 || height < 8) throw Error(ErrorCode::kInvalidArgument, "image size must be >= 8");
    if (!(translation.z() > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "camera translation must have positive depth");
    }
  }

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

struct PixelCoord {
  double u;
  double v;
};

inline constexpr double kMinDepth = 1e-6;

/// Pinhole projection of a camera-frame point (rotation and t* already applied).
inline PixelCoord project(const CameraModel& cam, const Vec3& p) {
  if (!(p.z() > kMinDepth)) {
    throw Error(ErrorCode::kDegenerateDepth, "point depth " + std::to_string(p.z()) + " <= 1e-6");
  }
  return {cam.focal_length * p.x() / p.z() + cam.cx, cam.focal_length * p.y() / p.z() + cam.cy};
}

inline Vec3 unproject(const CameraModel& cam, double u, double v, double depth) {
  return {(u - cam.cx) * depth / cam.focal_length, (v - cam.cy) * depth / cam.focal_length, depth};
}

/// Object rotation seen from a camera at the given azimuth/elevation (degrees).
struct ViewRotation {
  double azimuth = 0.0;    // [0, 360)
  double elevation = 0.0;  // [-90, 90]
};

/// Elevation about x composed after azimuth about y.
inline UnitQuaternion view_rotation_to_quat(const ViewRotation& view) {
  const auto az = UnitQuaternion::from_axis_angle(Vec3::UnitY(), deg_to_rad(view.azimuth));
  const auto el = UnitQuaternion::from_axis_angle(Vec3::UnitX(), deg_to_rad(view.elevation));
  return el * az;
}

template <typename Rng>
ViewRotation sample_view_rotation(Rng& rng, std::pair<double, double> azimuth_range,
                                  std::pair<double, double> elevation_range) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double a = uni(rng), e = uni(rng);
  return {azimuth_range.first + a * (azimuth_range.second - azimuth_range.first),
          elevation_range.first + e * (elevation_range.second - elevation_range.first)};
}

}  // namespace mvrecon

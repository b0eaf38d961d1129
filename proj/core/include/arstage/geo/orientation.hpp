#pragma once

#include "arstage/geo/vec3.hpp"

namespace arstage::geo {

/// Unit quaternion (w, x, y, z). Every factory and operator returns a
/// renormalized value, so the norm never drifts from 1 by more than ~1e-14.
///
/// Rotations act on local-frame vectors. The camera/body convention is:
/// forward = +z, up = +y, right = +x.
class Orientation {
 public:
  constexpr Orientation() = default;

  /// Builds from raw components and normalizes. Throws ValidationError for a
  /// zero or non-finite quaternion.
  static Orientation from_components(double w, double x, double y, double z);

  /// Rotation of `angle_rad` about `axis` (need not be unit length).
  static Orientation from_axis_angle(const Vec3& axis, double angle_rad);

  /// Rotation about +y (up). Positive yaw turns forward (+z) toward +x (East).
  static Orientation yaw(double angle_rad) { return from_axis_angle({0, 1, 0}, angle_rad); }

  static constexpr Orientation identity() { return {}; }

  [[nodiscard]] constexpr double w() const { return w_; }
  [[nodiscard]] constexpr double x() const { return x_; }
  [[nodiscard]] constexpr double y() const { return y_; }
  [[nodiscard]] constexpr double z() const { return z_; }
  [[nodiscard]] double norm() const;

  [[nodiscard]] Orientation operator*(const Orientation& rhs) const;
  [[nodiscard]] Orientation conjugate() const { return raw(w_, -x_, -y_, -z_); }
  [[nodiscard]] Orientation inverse() const { return conjugate(); }

  [[nodiscard]] Vec3 rotate(const Vec3& v) const;
  [[nodiscard]] Vec3 forward() const { return rotate({0, 0, 1}); }
  [[nodiscard]] Vec3 up() const { return rotate({0, 1, 0}); }

  /// Geodesic angle between two rotations, in radians, in [0, pi].
  [[nodiscard]] double angle_to(const Orientation& other) const;

  /// Spherical interpolation along the shortest arc; t in [0, 1].
  [[nodiscard]] static Orientation slerp(const Orientation& a, const Orientation& b, double t);

  /// Exact component equality.
  constexpr bool operator==(const Orientation&) const = default;

 private:
  constexpr Orientation(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {}
  static Orientation raw(double w, double x, double y, double z);

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Orientation from compass heading (0 = North/+z, 90 = East/+x), pitch
/// (positive tilts forward toward +y) and roll (positive tilts up toward +x),
/// all in degrees. Applied as heading, then pitch, then roll (intrinsic).
Orientation heading_to_orientation(double heading_deg, double pitch_deg = 0.0,
                                   double roll_deg = 0.0);

/// Compass heading of the orientation's forward axis projected on the ground,
/// in degrees in [0, 360).
double orientation_heading_deg(const Orientation& q);

}  // namespace arstage::geo

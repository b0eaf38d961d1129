#include "arstage/geo/orientation.hpp"

#include <algorithm>
#include <cmath>

#include "arstage/error.hpp"

namespace arstage::geo {

Orientation Orientation::raw(double w, double x, double y, double z) {
  const double n2 = w * w + x * x + y * y + z * z;
  // Already unit to machine precision: keep the exact bits so that values
  // survive serialization round trips unchanged.
  if (std::abs(n2 - 1.0) <= 1e-14) return Orientation(w, x, y, z);
  const double n = std::sqrt(n2);
  return Orientation(w / n, x / n, y / n, z / n);
}

Orientation Orientation::from_components(double w, double x, double y, double z) {
  const double n2 = w * w + x * x + y * y + z * z;
  if (!std::isfinite(n2) || n2 <= 1e-300) {
    throw ValidationError("orientation: quaternion must be finite and non-zero");
  }
  return raw(w, x, y, z);
}

Orientation Orientation::from_axis_angle(const Vec3& axis, double angle_rad) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle_rad)) {
    throw ValidationError("orientation: axis must be non-zero and angle finite");
  }
  const double s = std::sin(angle_rad / 2.0) / n;
  return raw(std::cos(angle_rad / 2.0), axis.x * s, axis.y * s, axis.z * s);
}

double Orientation::norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

Orientation Orientation::operator*(const Orientation& r) const {
  return raw(w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
             w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
             w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
             w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_);
}

Vec3 Orientation::rotate(const Vec3& v) const {
  // v' = v + 2w (u x v) + 2 u x (u x v), u = vector part
  const Vec3 u{x_, y_, z_};
  const Vec3 t = u.cross(v) * 2.0;
  return v + t * w_ + u.cross(t);
}

double Orientation::angle_to(const Orientation& o) const {
  if (*this == o) return 0.0;
  // atan2 form keeps precision for tiny angles where acos(|dot|) loses it.
  const Orientation rel = conjugate() * o;
  const double vec = std::sqrt(rel.x_ * rel.x_ + rel.y_ * rel.y_ + rel.z_ * rel.z_);
  return 2.0 * std::atan2(vec, std::abs(rel.w_));
}

Orientation Orientation::slerp(const Orientation& a, const Orientation& b, double t) {
  double bw = b.w_, bx = b.x_, by = b.y_, bz = b.z_;
  double cos_theta = a.w_ * bw + a.x_ * bx + a.y_ * by + a.z_ * bz;
  if (cos_theta < 0.0) {
    bw = -bw;
    bx = -bx;
    by = -by;
    bz = -bz;
    cos_theta = -cos_theta;
  }
  double wa = 1.0 - t;
  double wb = t;
  if (cos_theta < 1.0 - 1e-12) {
    const double theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
    const double s = std::sin(theta);
    wa = std::sin((1.0 - t) * theta) / s;
    wb = std::sin(t * theta) / s;
  }
  return raw(wa * a.w_ + wb * bw, wa * a.x_ + wb * bx, wa * a.y_ + wb * by, wa * a.z_ + wb * bz);
}

Orientation heading_to_orientation(double heading_deg, double pitch_deg, double roll_deg) {
  const Orientation yaw = Orientation::from_axis_angle({0, 1, 0}, deg_to_rad(heading_deg));
  const Orientation pitch = Orientation::from_axis_angle({1, 0, 0}, -deg_to_rad(pitch_deg));
  const Orientation roll = Orientation::from_axis_angle({0, 0, 1}, -deg_to_rad(roll_deg));
  return yaw * pitch * roll;
}

double orientation_heading_deg(const Orientation& q) {
  const Vec3 f = q.forward();
  double h = rad_to_deg(std::atan2(f.x, f.z));
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

}  // namespace arstage::geo

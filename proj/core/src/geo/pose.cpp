#include "arstage/geo/pose.hpp"

namespace arstage::geo {

LocalPose compose(const LocalPose& a, const LocalPose& b) {
  return {a.position + a.orientation.rotate(b.position), a.orientation * b.orientation};
}

LocalPose inverse(const LocalPose& a) {
  const Orientation inv = a.orientation.inverse();
  return {inv.rotate(-a.position), inv};
}

LocalPosition transform_point(const LocalPose& a, const LocalPosition& p) {
  return a.position + a.orientation.rotate(p);
}

LocalPose interpolate(const LocalPose& a, const LocalPose& b, double t) {
  return {a.position + (b.position - a.position) * t,
          Orientation::slerp(a.orientation, b.orientation, t)};
}

}  // namespace arstage::geo

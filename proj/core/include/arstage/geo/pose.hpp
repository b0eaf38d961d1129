#pragma once

#include "arstage/geo/orientation.hpp"
#include "arstage/geo/vec3.hpp"

namespace arstage::geo {

/// Rigid transform from a body frame into the local frame: p_local = R p_body + t.
struct LocalPose {
  LocalPosition position;
  Orientation orientation;

  static constexpr LocalPose identity() { return {}; }
  bool operator==(const LocalPose&) const = default;
};

/// a then b: transform_point(compose(a, b), p) == transform_point(a, transform_point(b, p)).
LocalPose compose(const LocalPose& a, const LocalPose& b);
LocalPose inverse(const LocalPose& a);
LocalPosition transform_point(const LocalPose& a, const LocalPosition& p);

/// Linear position / spherical orientation blend; t = 0 gives a, t = 1 gives b.
LocalPose interpolate(const LocalPose& a, const LocalPose& b, double t);

}  // namespace arstage::geo

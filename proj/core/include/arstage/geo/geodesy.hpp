#pragma once

#include <array>

#include "arstage/geo/vec3.hpp"

namespace arstage::geo {

/// WGS84 ellipsoid.
namespace wgs84 {
constexpr double kSemiMajorAxis = 6378137.0;
constexpr double kFlattening = 1.0 / 298.257223563;
constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);
}  // namespace wgs84

/// Geodetic position on the WGS84 ellipsoid. Degrees at the API boundary.
struct GeoPosition {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double height_m = 0.0;

  bool operator==(const GeoPosition&) const = default;
};

/// Wraps a longitude into (-180, 180].
double normalize_longitude(double longitude_deg);

/// Checks bounds and finiteness, and normalizes the longitude.
/// Throws ValidationError naming the offending field.
GeoPosition validated(const GeoPosition& p);
bool is_valid(const GeoPosition& p);

/// Earth-centered, Earth-fixed Cartesian coordinates in meters.
Vec3 geodetic_to_ecef(const GeoPosition& p);
GeoPosition ecef_to_geodetic(const Vec3& ecef);

/// A local tangent frame anchored at a geodetic origin.
/// Axes: +x East, +y Up (ellipsoid normal), +z North.
class FrameAnchor {
 public:
  explicit FrameAnchor(const GeoPosition& origin);

  [[nodiscard]] const GeoPosition& origin() const { return origin_; }
  [[nodiscard]] const Vec3& origin_ecef() const { return origin_ecef_; }
  /// Rows are the East, Up and North unit vectors expressed in ECEF.
  [[nodiscard]] const std::array<Vec3, 3>& basis() const { return basis_; }

  [[nodiscard]] LocalPosition to_local(const GeoPosition& p) const;
  [[nodiscard]] GeoPosition to_geo(const LocalPosition& p) const;

 private:
  GeoPosition origin_;
  Vec3 origin_ecef_;
  std::array<Vec3, 3> basis_;
};

/// Validates the origin and builds the anchor.
FrameAnchor make_anchor(const GeoPosition& origin);
LocalPosition geo_to_local(const FrameAnchor& anchor, const GeoPosition& p);
GeoPosition local_to_geo(const FrameAnchor& anchor, const LocalPosition& p);

}  // namespace arstage::geo

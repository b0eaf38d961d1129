#include "arstage/geo/geodesy.hpp"

#include <cmath>
#include <string>

#include "arstage/error.hpp"

namespace arstage::geo {

namespace {

using namespace wgs84;

double prime_vertical_radius(double sin_lat) {
  return kSemiMajorAxis / std::sqrt(1.0 - kEccentricitySq * sin_lat * sin_lat);
}

}  // namespace

double normalize_longitude(double lon) {
  double r = std::fmod(lon, 360.0);
  if (r > 180.0) r -= 360.0;
  if (r <= -180.0) r += 360.0;
  return r;
}

GeoPosition validated(const GeoPosition& p) {
  if (!std::isfinite(p.latitude_deg) || p.latitude_deg < -90.0 || p.latitude_deg > 90.0) {
    throw ValidationError("latitude_deg out of range [-90, 90]: " + std::to_string(p.latitude_deg));
  }
  if (!std::isfinite(p.longitude_deg)) {
    throw ValidationError("longitude_deg must be finite");
  }
  if (!std::isfinite(p.height_m)) {
    throw ValidationError("height_m must be finite");
  }
  return {p.latitude_deg, normalize_longitude(p.longitude_deg), p.height_m};
}

bool is_valid(const GeoPosition& p) {
  return std::isfinite(p.latitude_deg) && p.latitude_deg >= -90.0 && p.latitude_deg <= 90.0 &&
         std::isfinite(p.longitude_deg) && p.longitude_deg > -180.0 &&
         p.longitude_deg <= 180.0 && std::isfinite(p.height_m);
}

Vec3 geodetic_to_ecef(const GeoPosition& p) {
  const double lat = deg_to_rad(p.latitude_deg);
  const double lon = deg_to_rad(p.longitude_deg);
  const double sl = std::sin(lat);
  const double cl = std::cos(lat);
  const double n = prime_vertical_radius(sl);
  return {(n + p.height_m) * cl * std::cos(lon), (n + p.height_m) * cl * std::sin(lon),
          (n * (1.0 - kEccentricitySq) + p.height_m) * sl};
}

GeoPosition ecef_to_geodetic(const Vec3& e) {
  const double p = std::hypot(e.x, e.y);
  const double lon = std::atan2(e.y, e.x);
  // Fixed-point iteration on latitude; converges to machine precision in a
  // handful of steps for any terrestrial height.
  double lat = std::atan2(e.z, p * (1.0 - kEccentricitySq));
  double h = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double sl = std::sin(lat);
    const double n = prime_vertical_radius(sl);
    h = p * std::cos(lat) + e.z * sl - kSemiMajorAxis * std::sqrt(1.0 - kEccentricitySq * sl * sl);
    const double next = std::atan2(e.z, p * (1.0 - kEccentricitySq * n / (n + h)));
    const bool done = std::abs(next - lat) < 1e-15;
    lat = next;
    if (done) break;
  }
  const double sl = std::sin(lat);
  h = p * std::cos(lat) + e.z * sl - kSemiMajorAxis * std::sqrt(1.0 - kEccentricitySq * sl * sl);
  return {rad_to_deg(lat), normalize_longitude(rad_to_deg(lon)), h};
}

FrameAnchor::FrameAnchor(const GeoPosition& origin)
    : origin_(validated(origin)), origin_ecef_(geodetic_to_ecef(origin_)) {
  const double lat = deg_to_rad(origin_.latitude_deg);
  const double lon = deg_to_rad(origin_.longitude_deg);
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  basis_ = {Vec3{-so, co, 0.0}, Vec3{cl * co, cl * so, sl}, Vec3{-sl * co, -sl * so, cl}};
}

LocalPosition FrameAnchor::to_local(const GeoPosition& p) const {
  const Vec3 d = geodetic_to_ecef(p) - origin_ecef_;
  return {basis_[0].dot(d), basis_[1].dot(d), basis_[2].dot(d)};
}

GeoPosition FrameAnchor::to_geo(const LocalPosition& p) const {
  const Vec3 d = basis_[0] * p.x + basis_[1] * p.y + basis_[2] * p.z;
  return ecef_to_geodetic(origin_ecef_ + d);
}

FrameAnchor make_anchor(const GeoPosition& origin) { return FrameAnchor(origin); }

LocalPosition geo_to_local(const FrameAnchor& anchor, const GeoPosition& p) {
  return anchor.to_local(validated(p));
}

GeoPosition local_to_geo(const FrameAnchor& anchor, const LocalPosition& p) {
  return anchor.to_geo(p);
}

}  // namespace arstage::geo

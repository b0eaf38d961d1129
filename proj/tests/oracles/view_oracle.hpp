#pragma once

// Independent reference for camera projection: a conventional OpenGL-style
// view/projection matrix pipeline built with Eigen.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "oracles/geodesy_oracle.hpp"

namespace oracle {

/// gluPerspective: camera looks down -z, NDC cube [-1,1]^3.
inline Eigen::Matrix4d gl_perspective(double fovy_deg, double aspect, double n, double f) {
  const double t = 1.0 / std::tan(fovy_deg * M_PI / 360.0);
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  p(0, 0) = t / aspect;
  p(1, 1) = t;
  p(2, 2) = (f + n) / (n - f);
  p(2, 3) = 2.0 * f * n / (n - f);
  p(3, 2) = -1.0;
  return p;
}

struct Ndc {
  double x, y, z, w;
};

/// Projects a world point for a camera with pose matrix `camera` (world from
/// camera, forward +z). Mirroring z maps the forward axis onto GL's -z.
inline Ndc project(const Eigen::Matrix4d& camera, double fovy_deg, double aspect, double n,
                   double f, const Eigen::Vector3d& world) {
  Eigen::Matrix4d mirror = Eigen::Matrix4d::Identity();
  mirror(2, 2) = -1.0;
  const Eigen::Vector4d clip =
      gl_perspective(fovy_deg, aspect, n, f) * mirror * camera.inverse() * world.homogeneous();
  return {clip.x() / clip.w(), clip.y() / clip.w(), clip.z() / clip.w(), clip.w()};
}

inline bool ndc_inside(const Ndc& p) {
  return p.w > 0 && std::abs(p.x) <= 1 && std::abs(p.y) <= 1 && std::abs(p.z) <= 1;
}

/// Distance of an NDC point from the cube's boundary (for excluding a band).
inline double ndc_margin(const Ndc& p) {
  return std::min({std::abs(std::abs(p.x) - 1), std::abs(std::abs(p.y) - 1),
                   std::abs(std::abs(p.z) - 1)});
}

/// Point-in-polygon by winding number, with collinear-and-between boundary test.
inline bool polygon_contains(const std::vector<std::array<double, 2>>& v, double x, double z,
                             double eps = 1e-9) {
  int winding = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    const double cross = (b[0] - a[0]) * (z - a[1]) - (x - a[0]) * (b[1] - a[1]);
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    const double dot = (x - a[0]) * (b[0] - a[0]) + (z - a[1]) * (b[1] - a[1]);
    if (std::abs(cross) <= eps * len && dot >= -eps * len && dot <= len * len + eps * len) {
      return true;
    }
    if (a[1] <= z) {
      if (b[1] > z && cross > 0) ++winding;
    } else {
      if (b[1] <= z && cross < 0) --winding;
    }
  }
  return winding != 0;
}

}  // namespace oracle

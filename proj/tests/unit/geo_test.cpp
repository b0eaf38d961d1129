#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "arstage/error.hpp"
#include "arstage/geo/geodesy.hpp"
#include "arstage/geo/pose.hpp"
#include "oracles/geodesy_oracle.hpp"

namespace {

using namespace arstage::geo;

const GeoPosition kChicago{41.8781, -87.6298, 0.0};

LocalPose random_pose(std::mt19937_64& rng, double extent = 100.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  std::normal_distribution<double> n(0.0, 1.0);
  return {{u(rng), u(rng), u(rng)}, Orientation::from_components(n(rng), n(rng), n(rng), n(rng))};
}

void expect_pose_near(const LocalPose& a, const LocalPose& b, double tol) {
  EXPECT_NEAR(distance(a.position, b.position), 0.0, tol);
  EXPECT_NEAR(a.orientation.angle_to(b.orientation), 0.0, tol);
}

TEST(Geodesy, OriginMapsToFrameOrigin) {
  const auto anchor = make_anchor(kChicago);
  const auto p = geo_to_local(anchor, kChicago);
  EXPECT_EQ(p, (Vec3{0, 0, 0}));
}

TEST(Geodesy, PureHeightOffsetMapsToUp) {
  const auto anchor = make_anchor(kChicago);
  const auto p = geo_to_local(anchor, {kChicago.latitude_deg, kChicago.longitude_deg, 5.0});
  EXPECT_NEAR(p.x, 0.0, 1e-9);
  EXPECT_NEAR(p.y, 5.0, 1e-9);
  EXPECT_NEAR(p.z, 0.0, 1e-9);
  const auto g = local_to_geo(anchor, {0, 5, 0});
  EXPECT_NEAR(g.latitude_deg, kChicago.latitude_deg, 1e-12);
  EXPECT_NEAR(g.longitude_deg, kChicago.longitude_deg, 1e-12);
  EXPECT_NEAR(g.height_m, 5.0, 1e-8);
}

TEST(Geodesy, NorthStepMatchesMeridianArc) {
  const auto anchor = make_anchor(kChicago);
  const auto p = geo_to_local(anchor, {kChicago.latitude_deg + 0.001, kChicago.longitude_deg, 0});
  const double arc = static_cast<double>(oracle::meridian_arc(41.8781L, 41.8791L));
  EXPECT_NEAR(arc, 111.0709268, 1e-6);  // mpmath quadrature, 30 digits
  // Chord vs arc differs by ~1e-8 m at this distance.
  EXPECT_NEAR(p.z, arc, 1e-6);
  EXPECT_NEAR(p.z, 111.04, 0.05);
  EXPECT_LT(std::abs(p.x), 0.01);
}

TEST(Geodesy, EastStepAtEquatorMatchesEquatorialArc) {
  const auto anchor = make_anchor({0, 0, 0});
  const auto p = geo_to_local(anchor, {0, 0.001, 0});
  const double arc = static_cast<double>(oracle::kA * oracle::rad(0.001L));
  EXPECT_NEAR(arc, 111.3194908, 1e-6);
  EXPECT_NEAR(p.x, arc, 1e-5);
  EXPECT_NEAR(p.x, 111.32, 0.01);
  EXPECT_NEAR(p.z, 0.0, 1e-9);
}

TEST(Geodesy, InvalidOriginRejected) {
  EXPECT_THROW(make_anchor({91.0, 0, 0}), arstage::ValidationError);
  EXPECT_THROW(make_anchor({NAN, 0, 0}), arstage::ValidationError);
  EXPECT_THROW(make_anchor({0, INFINITY, 0}), arstage::ValidationError);
}

TEST(Geodesy, LongitudeNormalized) {
  EXPECT_DOUBLE_EQ(normalize_longitude(190.0), -170.0);
  EXPECT_DOUBLE_EQ(normalize_longitude(-180.0), 180.0);
  EXPECT_DOUBLE_EQ(normalize_longitude(180.0), 180.0);
  EXPECT_DOUBLE_EQ(normalize_longitude(540.0), 180.0);
}

TEST(Geodesy, AnchorBasisOrthonormal) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-89.9, 89.9), lon(-179.9, 180.0);
  for (int i = 0; i < 200; ++i) {
    const FrameAnchor a({lat(rng), lon(rng), 0});
    const auto& b = a.basis();
    for (int r = 0; r < 3; ++r) {
      EXPECT_NEAR(b[r].norm(), 1.0, 1e-15);
      for (int s = r + 1; s < 3; ++s) EXPECT_LT(std::abs(b[r].dot(b[s])), 1e-12);
    }
    // East x Up = -North in a right-handed ECEF: the local triple is left-handed.
    EXPECT_NEAR((b[0].cross(b[1]) + b[2]).norm(), 0.0, 1e-12);
  }
}

TEST(Geodesy, AxisConvention) {
  for (double lat : {-60.0, -30.0, 30.0, 45.0, 60.0}) {
    const GeoPosition o{lat, 12.5, 100.0};
    const auto anchor = make_anchor(o);
    const auto north = geo_to_local(anchor, local_to_geo(anchor, {0, 0, 100}));
    const auto east = geo_to_local(anchor, local_to_geo(anchor, {100, 0, 0}));
    const auto up = geo_to_local(anchor, {o.latitude_deg, o.longitude_deg, o.height_m + 100});
    EXPECT_NEAR(north.z, 100, 1e-6);
    EXPECT_NEAR(east.x, 100, 1e-6);
    EXPECT_NEAR(up.y, 100, 1e-6);
    // Moving along one geodetic coordinate changes mostly one axis.
    const double dlat = 100.0 / 111000.0;
    const auto n2 = geo_to_local(anchor, {o.latitude_deg + dlat, o.longitude_deg, o.height_m});
    EXPECT_GT(n2.z, 0);
    EXPECT_LT(std::abs(n2.x), 0.01);
    EXPECT_LT(std::abs(n2.y), 0.01);
    const double dlon = 100.0 / (111000.0 * std::cos(deg_to_rad(lat)));
    const auto e2 = geo_to_local(anchor, {o.latitude_deg, o.longitude_deg + dlon, o.height_m});
    EXPECT_GT(e2.x, 0);
    EXPECT_LT(std::abs(e2.z), 0.01);
    EXPECT_LT(std::abs(e2.y), 0.01);
  }
}

TEST(Geodesy, RoundTripWithin50km) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> off(-50000.0, 50000.0), h(-100.0, 500.0);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-180.0, 180.0);
  for (int o = 0; o < 5; ++o) {
    const auto anchor = make_anchor({lat(rng), lon(rng), h(rng)});
    for (int i = 0; i < 1000; ++i) {
      Vec3 p{off(rng), h(rng), off(rng)};
      if (std::hypot(p.x, p.z) > 50000.0) continue;
      const GeoPosition g = local_to_geo(anchor, p);
      const Vec3 back = geo_to_local(anchor, g);
      ASSERT_LT(distance(p, back), 1e-3);
      const GeoPosition g2 = local_to_geo(anchor, geo_to_local(anchor, g));
      ASSERT_NEAR(g2.latitude_deg, g.latitude_deg, 1e-9);
      ASSERT_NEAR(g2.longitude_deg, g.longitude_deg, 1e-9);
    }
  }
}

TEST(Geodesy, AgreesWithIndependentOracleWithin10km) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-179.0, 179.0);
  std::uniform_real_distribution<double> d(-0.06, 0.06), h(-50.0, 300.0);
  for (int i = 0; i < 1000; ++i) {
    const GeoPosition o{lat(rng), lon(rng), h(rng)};
    const GeoPosition p{o.latitude_deg + d(rng), o.longitude_deg + d(rng), h(rng)};
    const auto mine = geo_to_local(make_anchor(o), p);
    if (std::hypot(mine.x, mine.z) > 10000.0) continue;
    const auto ref = oracle::east_up_north(o.latitude_deg, o.longitude_deg, o.height_m,
                                           p.latitude_deg, p.longitude_deg, p.height_m);
    ASSERT_NEAR(mine.x, static_cast<double>(ref(0)), 1e-6);
    ASSERT_NEAR(mine.y, static_cast<double>(ref(1)), 1e-6);
    ASSERT_NEAR(mine.z, static_cast<double>(ref(2)), 1e-6);
  }
}

TEST(Orientation, HeadingConvention) {
  EXPECT_EQ(heading_to_orientation(0, 0, 0), Orientation::identity());
  const Vec3 east = heading_to_orientation(90, 0, 0).forward();
  EXPECT_NEAR(east.x, 1.0, 1e-12);
  EXPECT_NEAR(east.y, 0.0, 1e-12);
  EXPECT_NEAR(east.z, 0.0, 1e-12);
  // Rotation-matrix oracle for 45 deg.
  const Eigen::Vector4d f = oracle::yaw_matrix(45) * Eigen::Vector4d(0, 0, 1, 0);
  const Vec3 ne = heading_to_orientation(45, 0, 0).forward();
  EXPECT_NEAR(ne.x, f(0), 1e-12);
  EXPECT_NEAR(ne.z, f(2), 1e-12);
  EXPECT_NEAR(ne.x, std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(orientation_heading_deg(heading_to_orientation(270)), 270.0, 1e-9);
  EXPECT_GT(heading_to_orientation(0, 10, 0).forward().y, 0.0);
  EXPECT_GT(heading_to_orientation(0, 0, 10).up().x, 0.0);
}

TEST(Pose, IdentityAndInverse) {
  std::mt19937_64 rng(11);
  const auto a = random_pose(rng);
  expect_pose_near(compose(LocalPose::identity(), a), a, 1e-12);
  expect_pose_near(compose(a, inverse(a)), LocalPose::identity(), 1e-9);
  expect_pose_near(compose(inverse(a), a), LocalPose::identity(), 1e-9);
}

TEST(Pose, TranslationThenYawMatchesMatrixOracle) {
  const LocalPose t{{10, 0, 0}, Orientation::identity()};
  const LocalPose r{{0, 0, 0}, heading_to_orientation(90)};
  const auto composed = compose(t, r);
  const Vec3 p = transform_point(composed, {0, 0, 2});
  const Eigen::Vector4d ref =
      oracle::yaw_matrix(0, 10, 0, 0) * oracle::yaw_matrix(90) * Eigen::Vector4d(0, 0, 2, 1);
  EXPECT_NEAR(p.x, ref(0), 1e-12);
  EXPECT_NEAR(p.y, ref(1), 1e-12);
  EXPECT_NEAR(p.z, ref(2), 1e-12);
  EXPECT_NEAR(p.x, 12.0, 1e-12);
}

TEST(Pose, RandomPropertiesAgainstMatrixOracle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    // Associativity
    const auto l = compose(compose(a, b), c);
    const auto r = compose(a, compose(b, c));
    ASSERT_LT(distance(l.position, r.position), 1e-9);
    ASSERT_LT(l.orientation.angle_to(r.orientation), 1e-9);
    ASSERT_NEAR(l.orientation.norm(), 1.0, 1e-9);
    // Matrix oracle
    const auto& q = a.orientation;
    const auto ma = oracle::homogeneous(a.position.x, a.position.y, a.position.z, q.w(), q.x(),
                                        q.y(), q.z());
    const Vec3 p{1.5, -2.0, 3.25};
    const Vec3 mine = transform_point(a, p);
    const Eigen::Vector4d ref = ma * Eigen::Vector4d(p.x, p.y, p.z, 1);
    ASSERT_NEAR(mine.x, ref(0), 1e-9);
    ASSERT_NEAR(mine.y, ref(1), 1e-9);
    ASSERT_NEAR(mine.z, ref(2), 1e-9);
    const auto inv = compose(a, inverse(a));
    ASSERT_LT(inv.position.norm(), 1e-9);
    ASSERT_LT(inv.orientation.angle_to(Orientation::identity()), 1e-9);
  }
}

TEST(Orientation, SlerpEndpointsAndMidpoint) {
  const auto a = heading_to_orientation(10), b = heading_to_orientation(70);
  EXPECT_LT(Orientation::slerp(a, b, 0).angle_to(a), 1e-12);
  EXPECT_LT(Orientation::slerp(a, b, 1).angle_to(b), 1e-12);
  EXPECT_NEAR(orientation_heading_deg(Orientation::slerp(a, b, 0.5)), 40.0, 1e-9);
}

TEST(Orientation, AngleSymmetricAndZeroIffEqual) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_pose(rng).orientation, b = random_pose(rng).orientation;
    EXPECT_NEAR(a.angle_to(b), b.angle_to(a), 1e-12);
    EXPECT_EQ(a.angle_to(a), 0.0);
  }
  EXPECT_NEAR(rad_to_deg(heading_to_orientation(0).angle_to(heading_to_orientation(25))), 25.0,
              1e-9);
  EXPECT_THROW(Orientation::from_components(0, 0, 0, 0), arstage::ValidationError);
}

}  // namespace

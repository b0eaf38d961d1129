#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "arstage/sim/client.hpp"
#include "arstage/sim/harness.hpp"
#include "arstage/sim/scenario.hpp"
#include "arstage/sim/summary.hpp"
#include "oracles/geodesy_oracle.hpp"
#include "support/world.hpp"

namespace {

using namespace arstage;
using namespace arstage::sim;

// ---------------------------------------------------------------------------
// Scenario files

constexpr const char* kScenarioJson = R"({
  "name": "walker",
  "client_id": "user-7",
  "profile": "iphone-x",
  "path": [
    {"lat": 41.8781, "lon": -87.6298, "height": 1.6},
    {"lat": 41.8790, "lon": -87.6298, "height": 1.6, "dwell_s": 5}
  ],
  "speed_m_s": 1.2,
  "noise": {"gps_sigma_m": 3, "imu_rate_hz": 20, "seed": 42},
  "faults": [
    {"kind": "gps_bias", "start_s": 10, "duration_s": 20, "offset_m": [15, 0, 0]},
    {"kind": "gyro_drift", "start_s": 40, "duration_s": 10, "deg_s": 3, "max_deg": 25},
    {"kind": "dropout", "start_s": 60, "duration_s": 5, "mode": "target"}
  ],
  "slam": true
})";

TEST(ScenarioFile, Parses) {
  const Scenario s = scenario_from_json(kScenarioJson);
  EXPECT_EQ(s.id(), "user-7");
  EXPECT_EQ(s.profile, viewsim::profile_preset("iphone-x"));
  ASSERT_EQ(s.path.size(), 2u);
  EXPECT_DOUBLE_EQ(s.path[1].dwell_s, 5.0);
  EXPECT_DOUBLE_EQ(s.speed_m_s, 1.2);
  EXPECT_DOUBLE_EQ(s.noise.gps_sigma_m, 3.0);
  EXPECT_DOUBLE_EQ(s.noise.accuracy_m(), 1.51 * 3.0);
  EXPECT_EQ(s.noise.seed, 42u);
  ASSERT_EQ(s.faults.size(), 3u);
  EXPECT_EQ(std::get<GpsBias>(s.faults[0].kind).offset_m, (geo::Vec3{15, 0, 0}));
  EXPECT_DOUBLE_EQ(std::get<GyroDrift>(s.faults[1].kind).max_deg, 25.0);
  EXPECT_EQ(std::get<Dropout>(s.faults[2].kind).mode, tracking::TrackingMode::TargetBased);
  EXPECT_EQ(s.faults[2].kind_name(), "dropout");
  EXPECT_TRUE(s.slam);
  EXPECT_TRUE(s.fiducials);
}

TEST(ScenarioFile, RoundTrips) {
  const Scenario s = scenario_from_json(kScenarioJson);
  EXPECT_EQ(scenario_from_json(scenario_to_json(s)), s);
}

TEST(ScenarioFile, ErrorsNameTheKeyPath) {
  auto where = [](std::string text) {
    try {
      (void)scenario_from_json(text);
    } catch (const ScenarioError& e) {
      return e.where();
    }
    return std::string("<accepted>");
  };
  auto patched = [](const char* pointer, nlohmann::json value) {
    auto j = nlohmann::json::parse(kScenarioJson);
    j[nlohmann::json::json_pointer(pointer)] = std::move(value);
    return j.dump();
  };
  EXPECT_EQ(where(patched("/speed_m_s", 0)), "speed_m_s");
  EXPECT_EQ(where(patched("/path/1/lat", 95)), "path[1]");
  EXPECT_EQ(where(patched("/faults/0/kind", "solar_flare")), "faults[0].kind");
  EXPECT_EQ(where(patched("/noise/gps_sigma_m", -1)), "noise.gps_sigma_m");
  EXPECT_EQ(where(patched("/noise/turbulence", 1)), "noise.turbulence");
  EXPECT_EQ(where(patched("/profile", "nokia-3310")), "profile");
  EXPECT_EQ(where(patched("/path", nlohmann::json::array())), "path");
  EXPECT_EQ(where("{\"name\": \"x\",}").rfind("line 1", 0), 0u);
}

TEST(ScenarioFile, OverlappingFaultsOfOneKindAreRejected) {
  Scenario s = testworld::walk_north("a");
  s.faults = {{10, 10, GpsBias{{5, 0, 0}}}, {15, 10, GpsBias{{0, 0, 5}}}};
  EXPECT_THROW(validate_scenario(s), ScenarioError);
  s.faults[1].start_s = 20;  // back to back is fine
  EXPECT_NO_THROW(validate_scenario(s));
  s.faults[1].kind = GyroDrift{2.0};  // different kinds may overlap
  s.faults[1].start_s = 12;
  EXPECT_NO_THROW(validate_scenario(s));
}

// ---------------------------------------------------------------------------
// Trajectory

TEST(Trajectory, StraightWalkTakesLengthOverSpeed) {
  const Trajectory t(testworld::walk_north("a", 100.0, 1.0), testworld::anchor());
  EXPECT_NEAR(t.duration_s(), 100.0, 1e-6);
  const auto start = t.pose_at(0);
  const auto mid = t.pose_at(50);
  const auto end = t.pose_at(100);
  EXPECT_NEAR(geo::distance(start.position, {0, 1.6, 0}), 0.0, 1e-6);
  EXPECT_NEAR(geo::distance(mid.position, {0, 1.6, 50}), 0.0, 1e-6);
  EXPECT_NEAR(geo::distance(end.position, {0, 1.6, 100}), 0.0, 1e-6);
  // Facing north the whole way: forward is +z.
  EXPECT_NEAR(mid.orientation.forward().z, 1.0, 1e-9);
  // Clamped past the end.
  EXPECT_EQ(t.pose_at(500).position, end.position);
}

TEST(Trajectory, DwellHoldsPositionAndHeading) {
  Scenario s;
  s.name = "l-shape";
  s.profile = viewsim::profile_preset("pixel-3");
  s.speed_m_s = 2.0;
  const auto& a = testworld::anchor();
  s.path = {{a.to_geo({0, 1.6, 0}), 3.0}, {a.to_geo({0, 1.6, 10}), 4.0},
            {a.to_geo({10, 1.6, 10}), 0.0}};
  const Trajectory t(s, a);
  EXPECT_NEAR(t.duration_s(), 3 + 5 + 4 + 5, 1e-6);
  // Dwelling at the start faces the first segment.
  EXPECT_NEAR(geo::distance(t.pose_at(2.0).position, {0, 1.6, 0}), 0.0, 1e-6);
  EXPECT_NEAR(t.pose_at(2.0).orientation.forward().z, 1.0, 1e-9);
  // Dwelling at the corner keeps the arrival heading (north).
  EXPECT_NEAR(geo::distance(t.pose_at(10.0).position, {0, 1.6, 10}), 0.0, 1e-6);
  EXPECT_NEAR(t.pose_at(10.0).orientation.forward().z, 1.0, 1e-9);
  // Then turns east.
  const auto leg2 = t.pose_at(14.5);
  EXPECT_NEAR(geo::distance(leg2.position, {5, 1.6, 10}), 0.0, 1e-6);
  EXPECT_NEAR(leg2.orientation.forward().x, 1.0, 1e-9);
}

// ---------------------------------------------------------------------------
// Fiducial detection

TEST(TargetDetection, CameraTwoMetresInFrontSeesMinusTwoZ) {
  // A 1 m fiducial at the origin facing -z; the camera stands 2 m in front
  // of it (at z = -2) looking at it along +z.
  const tracking::FiducialPlacement fid{geo::LocalPose::identity(), 1.0};
  const geo::LocalPose camera{{0, 0, -2}, geo::Orientation::identity()};
  const auto d = synthesize_target_detection(camera, "f", fid);
  ASSERT_TRUE(d);
  EXPECT_NEAR(geo::distance(d->relative_pose.position, {0, 0, -2}), 0.0, 1e-12);
  EXPECT_NEAR(d->relative_pose.orientation.angle_to(geo::Orientation::identity()), 0.0, 1e-12);
}

TEST(TargetDetection, WidthScalesTheTranslation) {
  const tracking::FiducialPlacement fid{geo::LocalPose::identity(), 0.5};
  const geo::LocalPose camera{{0, 0, -2}, geo::Orientation::identity()};
  const auto d = synthesize_target_detection(camera, "f", fid);
  ASSERT_TRUE(d);
  EXPECT_NEAR(d->relative_pose.position.z, -4.0, 1e-12);
}

TEST(TargetDetection, InferenceClosesTheLoop) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const tracking::FiducialPlacement fid{
        {{u(rng) * 50, u(rng) * 5, u(rng) * 50}, geo::heading_to_orientation(u(rng) * 180)},
        0.2 + std::abs(u(rng))};
    // Somewhere in front of the fiducial, looking roughly at it.
    const geo::Vec3 back = fid.world.orientation.rotate({u(rng) * 2, u(rng), -3 - 5 * std::abs(u(rng))});
    const geo::LocalPose camera{fid.world.position + back,
                                fid.world.orientation *
                                    geo::heading_to_orientation(u(rng) * 20, u(rng) * 10, 0)};
    const auto d = synthesize_target_detection(camera, "f", fid);
    ASSERT_TRUE(d) << i;
    const auto inferred = tracking::infer_camera_from_fiducial(fid, *d);
    EXPECT_LT(geo::distance(inferred.position, camera.position), 1e-9);
    EXPECT_LT(inferred.orientation.angle_to(camera.orientation), 1e-9);
  }
}

TEST(TargetDetection, GateRejectsFarAndOffAxis) {
  const tracking::FiducialPlacement fid{geo::LocalPose::identity(), 1.0};
  EXPECT_FALSE(synthesize_target_detection({{0, 0, -15.5}, geo::Orientation::identity()}, "f", fid));
  EXPECT_TRUE(synthesize_target_detection({{0, 0, -14.5}, geo::Orientation::identity()}, "f", fid));
  // 90 degrees off the camera axis.
  EXPECT_FALSE(
      synthesize_target_detection({{0, 0, -2}, geo::heading_to_orientation(90)}, "f", fid));
  EXPECT_TRUE(
      synthesize_target_detection({{0, 0, -2}, geo::heading_to_orientation(55)}, "f", fid));
}

// ---------------------------------------------------------------------------
// Scripted client

/// Drives one client against a minimal fake server that only sends the
/// snapshot, then steps it to completion.
SimClient run_standalone(Scenario s) {
  SimClient c(std::move(s));
  (void)c.hello();
  protocol::ContentSnapshot snap;
  const auto p = testworld::project();
  snap.project_name = p.name;
  snap.origin = p.anchor_origin;
  snap.items = p.items;
  for (const auto& text : protocol::encode_snapshot_chunks(snap, 1)) c.on_wire(text);
  while (!c.done()) (void)c.step();
  return c;
}

std::vector<protocol::PoseUpdate> sent_poses(const SimClient& c) {
  std::vector<protocol::PoseUpdate> out;
  for (const auto& r : c.log()) {
    if (r.kind != LogRecord::Kind::Sent) continue;
    const auto m = protocol::decode(r.message);
    if (const auto* p = std::get_if<protocol::PoseUpdate>(&m.body)) out.push_back(*p);
  }
  return out;
}

TEST(SimClient, NotReadyUntilSnapshot) {
  SimClient c(testworld::walk_north("a"));
  (void)c.hello();
  EXPECT_FALSE(c.ready());
  EXPECT_FALSE(c.done());
  EXPECT_TRUE(c.step().empty());
}

TEST(SimClient, SameSeedGivesByteIdenticalLogs) {
  Scenario s = testworld::walk_north("a", 40);
  s.noise.gps_sigma_m = 4;
  s.noise.detection_rot_sigma_deg = 2;
  s.noise.seed = 99;
  s.slam = true;
  auto render = [](const SimClient& c) {
    std::ostringstream out;
    write_log(out, c.log());
    return out.str();
  };
  const std::string a = render(run_standalone(s));
  const std::string b = render(run_standalone(s));
  EXPECT_EQ(a, b);
  s.noise.seed = 100;
  EXPECT_NE(a, render(run_standalone(s)));
}

TEST(SimClient, LogLinesAreJson) {
  const SimClient c = run_standalone(testworld::walk_north("a", 5));
  std::ostringstream out;
  write_log(out, c.log());
  std::istringstream in(out.str());
  std::string line;
  std::set<std::string> types;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    types.insert(j.at("type").get<std::string>());
    EXPECT_TRUE(j.at("t_ms").is_number_integer());
  }
  EXPECT_EQ(types, (std::set<std::string>{"truth", "sent", "received"}));
}

TEST(SimClient, GpsNoiseHasTheConfiguredSigma) {
  // 1000 fixes, two axes each. The sample variance of n normal draws follows
  // sigma² chi²(n)/n; at n = 2000 its 99.9% interval is within +-7% in sigma.
  Scenario s = testworld::walk_north("a", 1000, 1.0);
  s.fiducials = false;
  s.noise.gps_sigma_m = 3.0;
  s.noise.imu_rate_hz = 1.0;
  s.noise.seed = 2024;
  const SimClient c = run_standalone(s);
  ASSERT_GE(c.gps_offsets().size(), 1000u);
  double sum = 0, sum_sq = 0;
  std::size_t n = 0;
  for (const auto& o : c.gps_offsets()) {
    for (double v : {o.x, o.z}) {
      sum += v;
      sum_sq += v * v;
      ++n;
    }
    EXPECT_EQ(o.y, 0.0);
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum_sq / n - mean * mean);
  EXPECT_NEAR(sd, 3.0, 0.3);
  EXPECT_NEAR(mean, 0.0, 4 * 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(SimClient, GyroDriftGrowsSaturatesAndEnds) {
  Scenario s = testworld::walk_north("a", 60, 1.0);
  s.fiducials = false;
  s.faults = {{10, 30, GyroDrift{2.0, 25.0}}};
  const SimClient c = run_standalone(s);
  for (const auto& p : sent_poses(c)) {
    const auto& r = std::get<tracking::SensorReading>(p.evidence.payload);
    const double t = p.evidence.timestamp_ms / 1000.0;
    const double err = geo::rad_to_deg(
        r.orientation.angle_to(c.truth_at(p.evidence.timestamp_ms).orientation));
    const double want = t < 10 || t >= 40 ? 0.0 : std::min(2.0 * (t - 10), 25.0);
    EXPECT_NEAR(err, want, 1e-6) << t;
  }
}

TEST(SimClient, GpsBiasShiftsFixesDuringItsWindow) {
  Scenario s = testworld::walk_north("a", 30, 1.0);
  s.fiducials = false;
  s.faults = {{5, 10, GpsBias{{12, 0, -3}}}};
  const SimClient c = run_standalone(s);
  for (const auto& p : sent_poses(c)) {
    const auto& r = std::get<tracking::SensorReading>(p.evidence.payload);
    const double t = p.evidence.timestamp_ms / 1000.0;
    const geo::Vec3 off = testworld::anchor().to_local(r.geo) -
                          c.truth_at(p.evidence.timestamp_ms).position;
    const geo::Vec3 want = t >= 5 && t < 15 ? geo::Vec3{12, 0, -3} : geo::Vec3{0, 0, 0};
    EXPECT_LT(geo::distance(off, want), 1e-6) << t;
  }
}

TEST(SimClient, DropoutSuppressesOneSource) {
  Scenario s = testworld::walk_north("a", 20, 1.0);
  s.faults = {{0, 100, Dropout{tracking::TrackingMode::TargetBased}}};
  const SimClient c = run_standalone(s);
  for (const auto& p : sent_poses(c)) {
    EXPECT_FALSE(std::holds_alternative<tracking::TargetDetection>(p.evidence.payload));
  }
}

TEST(SimClient, FiducialInViewProducesDetections) {
  const SimClient c = run_standalone(testworld::walk_north("a", 20, 1.0));
  std::size_t detections = 0;
  for (const auto& p : sent_poses(c)) {
    if (const auto* d = std::get_if<tracking::TargetDetection>(&p.evidence.payload)) {
      EXPECT_EQ(d->fiducial_id, "plaque");
      ++detections;
    }
  }
  // The plaque is 10 m ahead: visible from the start until it is passed.
  EXPECT_GT(detections, 200u);
}

// ---------------------------------------------------------------------------
// In-process runs

server::ServerConfig test_config() { return {}; }

TEST(Harness, ZeroNoiseWalkClosesExactly) {
  // All three sources together, and GPS alone. (Fiducials without SLAM lag:
  // a 1 Hz GPS fix cannot be carried forward between fixes.)
  for (bool slam : {true, false}) {
    InProcessHarness h(test_config(), testworld::project(), testworld::walkable());
    h.add_observer();
    Scenario s = testworld::walk_north("walker", 100, 1.0);
    s.slam = slam;
    s.fiducials = slam;
    h.add_client(s);
    h.run();
    const auto summary = summarize(h.traces(), h.observer().frames());
    ASSERT_EQ(summary.size(), 1u);
    EXPECT_TRUE(summary[0].completed);
    EXPECT_EQ(summary[0].errors, 0u);
    EXPECT_GT(summary[0].samples, slam ? 900u : 90u);
    EXPECT_LT(summary[0].max_position_error_m, 1e-6) << "slam=" << slam;
    EXPECT_LT(summary[0].max_orientation_error_deg, 1e-6) << "slam=" << slam;
    EXPECT_EQ(ClientSummary::majority(summary[0].verdicts), viewsim::Verdict::Nominal);

    // The walk ends 100 m north of the origin, per an independent geodesy oracle.
    const auto& truth = h.client(0).truth();
    ASSERT_FALSE(truth.empty());
    EXPECT_EQ(truth.rbegin()->first, slam ? 99990 : 99000);
    const auto end = h.client(0).truth_at(100000).position;
    const auto geo_end = testworld::anchor().to_geo(end);
    EXPECT_NEAR(oracle::vincenty_distance(testworld::kOrigin.latitude_deg,
                                            testworld::kOrigin.longitude_deg,
                                            geo_end.latitude_deg, geo_end.longitude_deg),
                100.0, 1e-3);
  }
}

TEST(Harness, EditsReachEveryClientOnce) {
  InProcessHarness h(test_config(), testworld::project(), testworld::walkable());
  h.add_observer();
  for (int i = 0; i < 5; ++i) h.add_client(testworld::walk_north("u" + std::to_string(i), 10), i * 37);
  protocol::EditCommand move{"sign", protocol::EditOp::Update,
                             testworld::anchor().to_geo({3, 2, 30}), {}, {}, ""};
  h.schedule_edit(2000, move);
  protocol::EditCommand scale{"sign", protocol::EditOp::Update, {}, {}, geo::Vec3{3, 1, 0.05}, ""};
  h.schedule_edit(2000, scale);
  h.run();
  for (std::size_t i = 0; i < h.client_count(); ++i) {
    const auto& deltas = h.client(i).deltas();
    ASSERT_EQ(deltas.size(), 2u);
    EXPECT_EQ(deltas[0].revision, 1u);
    EXPECT_EQ(deltas[1].revision, 2u);
    EXPECT_EQ(h.client(i).items().at("sign").scale, (geo::Vec3{3, 1, 0.05}));
    EXPECT_EQ(h.client(i).items().at("sign").geo, move.geo);
  }
  EXPECT_EQ(h.observer().deltas().size(), 2u);
  EXPECT_TRUE(h.observer().errors().empty());
}

TEST(Harness, FaultsAreDiagnosedInTheFeed) {
  InProcessHarness h(test_config(), testworld::project(), testworld::walkable());
  h.add_observer();
  Scenario gyro = testworld::walk_north("gyro", 60, 1.0);
  gyro.fiducials = false;
  gyro.faults = {{10, 50, GyroDrift{5.0, 30.0}}};
  Scenario gps = testworld::walk_north("gps", 60, 1.0, 2.0);
  gps.fiducials = false;
  gps.faults = {{10, 50, GpsBias{{12, 0, 0}}}};
  h.add_client(gyro);
  h.add_client(gps);
  h.run();
  const auto summary = summarize(h.traces(), h.observer().frames());
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(ClientSummary::majority(summary[0].fault_verdicts),
            viewsim::Verdict::RotationalMismatch);
  EXPECT_EQ(ClientSummary::majority(summary[1].fault_verdicts),
            viewsim::Verdict::PositionalMismatch);
  EXPECT_NE(format_summary_table(summary).find("gyro"), std::string::npos);
  const auto j = nlohmann::json::parse(summary_to_json(summary));
  EXPECT_EQ(j.at("clients").size(), 2u);
}

TEST(Harness, ObserverSeesJoinsAndFeed) {
  InProcessHarness h(test_config(), testworld::project(), testworld::walkable());
  h.add_observer();
  h.add_client(testworld::walk_north("a", 3), 0);
  h.add_client(testworld::walk_north("b", 3), 500);
  h.run();
  EXPECT_EQ(h.observer().joined(), (std::vector<std::string>{"a", "b"}));
  ASSERT_FALSE(h.observer().frames().empty());
  // One frame per tick, in order.
  const auto& frames = h.observer().frames();
  for (std::size_t i = 1; i < frames.size(); ++i) EXPECT_EQ(frames[i].tick, frames[i - 1].tick + 1);
}

}  // namespace

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arstage/error.hpp"
#include "arstage/geo/geodesy.hpp"
#include "arstage/geo/pose.hpp"
#include "arstage/tracking/evidence.hpp"
#include "arstage/viewsim/device_profile.hpp"

namespace arstage::sim {

/// A point the simulated camera walks through, then waits at for `dwell_s`.
/// Heights are camera heights, not ground heights.
struct Waypoint {
  geo::GeoPosition geo;
  double dwell_s = 0.0;
  bool operator==(const Waypoint&) const = default;
};

/// Sensor imperfections. Everything is reproducible from `seed`.
struct NoiseModel {
  /// Standard deviation of GPS error per horizontal axis (white Gaussian).
  double gps_sigma_m = 0.0;
  /// Accuracy radius the device reports; defaults to 1.51 sigma (the 68%
  /// radius of a circular Gaussian), with a floor of 0.1 m.
  std::optional<double> reported_accuracy_m;
  double gps_rate_hz = 1.0;
  /// Frame rate: SLAM deltas and fiducial detections are produced per frame.
  double imu_rate_hz = 30.0;
  /// Constant heading drift rate of the orientation sensor.
  double gyro_drift_deg_s = 0.0;
  double compass_bias_deg = 0.0;
  /// Standard deviation of the rotation error of fiducial detections.
  double detection_rot_sigma_deg = 0.0;
  std::uint64_t seed = 1;

  [[nodiscard]] double accuracy_m() const;
  bool operator==(const NoiseModel&) const = default;
};

/// Constant GPS offset in the local frame (x East, y Up, z North), e.g. from
/// multipath near tall buildings.
struct GpsBias {
  geo::Vec3 offset_m;
  bool operator==(const GpsBias&) const = default;
};

/// Heading error growing at `deg_s` from the start of the fault, saturating
/// at `max_deg` (magnetic interference). It disappears when the fault ends.
struct GyroDrift {
  double deg_s = 0.0;
  double max_deg = 180.0;
  bool operator==(const GyroDrift&) const = default;
};

/// No evidence of `mode` is produced while active.
struct Dropout {
  tracking::TrackingMode mode = tracking::TrackingMode::SensorBased;
  bool operator==(const Dropout&) const = default;
};

struct FaultInjection {
  double start_s = 0.0;
  double duration_s = 0.0;
  std::variant<GpsBias, GyroDrift, Dropout> kind;

  /// Active on [start_s, start_s + duration_s).
  [[nodiscard]] bool active_at(double t_s) const {
    return t_s >= start_s && t_s < start_s + duration_s;
  }
  /// "gps_bias", "gyro_drift" or "dropout".
  [[nodiscard]] std::string_view kind_name() const;
  bool operator==(const FaultInjection&) const = default;
};

/// One scripted AR client.
struct Scenario {
  std::string name;
  /// Defaults to `name` when empty.
  std::string client_id;
  viewsim::DeviceProfile profile;
  std::vector<Waypoint> path;
  double speed_m_s = 1.4;
  NoiseModel noise;
  std::vector<FaultInjection> faults;

  /// Evidence sources besides GPS/compass.
  bool slam = false;
  bool fiducials = true;
  double thumbnail_rate_hz = 1.0;
  double telemetry_rate_hz = 1.0;
  double render_fps = 60.0;

  [[nodiscard]] const std::string& id() const { return client_id.empty() ? name : client_id; }
  bool operator==(const Scenario&) const = default;
};

/// Malformed or invalid scenario file; `where()` is the key path.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string where, const std::string& message)
      : Error(where + ": " + message), where_(std::move(where)) {}
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Throws ScenarioError: no waypoints, non-positive speed or rates, negative
/// sigmas or durations, overlapping faults of the same kind.
void validate_scenario(const Scenario& scenario);

Scenario scenario_from_json(std::string_view text);
std::string scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

/// Ground-truth camera motion along a scenario's path, in a given frame.
///
/// The camera moves in straight lines between waypoints at constant speed,
/// dwelling at each waypoint. It is level and faces along its current
/// segment; while dwelling it keeps the heading it arrived with (the first
/// waypoint uses the first segment's heading).
class Trajectory {
 public:
  Trajectory(const Scenario& scenario, const geo::FrameAnchor& anchor);

  [[nodiscard]] double duration_s() const { return duration_s_; }
  [[nodiscard]] geo::LocalPose pose_at(double t_s) const;

 private:
  struct Leg {
    double start_s;
    double dwell_end_s;  // dwell at `from` ends here, then travel
    double end_s;
    geo::LocalPosition from;
    geo::LocalPosition to;
    double heading_deg;
    double arrive_heading_deg;  // heading while dwelling at `from`
  };
  std::vector<Leg> legs_;
  geo::LocalPosition last_;
  double last_heading_deg_ = 0.0;
  double duration_s_ = 0.0;
};

}  // namespace arstage::sim

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arstage/content/content_item.hpp"
#include "arstage/error.hpp"
#include "arstage/geo/geodesy.hpp"
#include "arstage/geo/pose.hpp"
#include "arstage/tracking/evidence.hpp"

namespace arstage::tracking {

struct FusionConfig {
  std::int64_t staleness_ms = 500;
  std::int64_t transition_ms = 1000;
  /// SLAM is preferred over GPS within `near_m` of content; it stops being
  /// preferred beyond `near_m + hysteresis_m`.
  double near_m = 30.0;
  double hysteresis_m = 5.0;
  /// Growth of the horizontal accuracy radius while dead-reckoning on SLAM.
  double slam_drift_m_per_s = 0.1;
  /// Accuracy reported while a fiducial fix is active.
  double target_accuracy_m = 0.5;

  bool operator==(const FusionConfig&) const = default;
};

struct FusedPose {
  geo::LocalPose pose;
  /// Empty until an absolute fix has been received.
  std::optional<double> horizontal_accuracy_m;
  TrackingMode active_mode = TrackingMode::SensorBased;
  /// 1 when fully in `active_mode`; below 1 during a mode transition.
  double blend_weight = 1.0;
  std::int64_t timestamp_ms = 0;

  bool operator==(const FusedPose&) const = default;
};

/// A fiducial's world pose and real-world width (meters).
struct FiducialPlacement {
  geo::LocalPose world;
  double width_m = 1.0;
};

using FiducialCatalog = std::map<std::string, FiducialPlacement>;

/// Collects every Fiducial item of `items` with its pose in `anchor`'s frame.
FiducialCatalog build_fiducial_catalog(std::span<const content::ContentItem> items,
                                       const geo::FrameAnchor& anchor);

/// World camera pose from a detection: fiducial_world composed with the
/// relative pose, after scaling its translation from fiducial widths to meters.
/// Throws ValidationError for a non-positive width or zero confidence.
geo::LocalPose infer_camera_from_fiducial(const FiducialPlacement& fiducial,
                                          const TargetDetection& detection);

/// Inverse of the above: the detection a camera at `camera_world` would report.
geo::LocalPose relative_pose_from_camera(const FiducialPlacement& fiducial,
                                         const geo::LocalPose& camera_world);

/// Evidence timestamp went backwards. State is left unchanged.
class TimestampRegression : public Error {
 public:
  TimestampRegression(std::int64_t previous, std::int64_t received)
      : Error("timestamp regression: received " + std::to_string(received) +
              " ms after " + std::to_string(previous) + " ms"),
        previous_(previous),
        received_(received) {}
  [[nodiscard]] std::int64_t previous() const { return previous_; }
  [[nodiscard]] std::int64_t received() const { return received_; }

 private:
  std::int64_t previous_;
  std::int64_t received_;
};

/// Shared, read-only inputs for fusion. Owned by the caller.
struct FusionContext {
  const geo::FrameAnchor* anchor = nullptr;
  const FiducialCatalog* fiducials = nullptr;
  /// Local positions of renderable content, for the SLAM proximity gate.
  /// When empty the gate is open.
  std::span<const geo::LocalPosition> content_points;
};

/// Per-client "triple camera" fusion.
///
/// One virtual camera per tracking mode is kept up to date from its own
/// evidence; the active camera is chosen by priority among cameras fresher
/// than the staleness window (target > SLAM > sensor, with SLAM gated by
/// proximity to content when GPS is available). A change of active camera
/// cross-fades from the outgoing to the incoming camera over the transition
/// window, linearly in position and spherically in orientation.
///
/// SLAM deltas accumulate onto the most recent absolute fix. The SLAM camera
/// is re-based on each absolute fix only while SLAM is not the active mode, so
/// consecutive SLAM-driven outputs never jump. The absolute cameras are carried
/// forward by the SLAM motion received after their fix, so a fix that is a
/// few frames old still describes where the device is now. A SLAM delta
/// stamped with the same instant as an absolute fix is taken to be already
/// reflected in that fix.
///
/// A transition only starts from the outgoing camera while that camera still
/// tracks the device (fresh, or carried by fresh SLAM motion); a camera that
/// has gone stale no longer describes the device, so the switch is immediate.
class PoseFusion {
 public:
  explicit PoseFusion(FusionConfig config = {}) : config_(config) {}

  /// Deterministic in (state, evidence). Throws TimestampRegression,
  /// ValidationError or NotFoundError (unknown fiducial) without modifying state.
  FusedPose ingest(const PoseEvidence& evidence, const FusionContext& context);

  [[nodiscard]] std::optional<double> accuracy_of() const { return accuracy_at(last_ts_.value_or(0)); }
  [[nodiscard]] const std::optional<FusedPose>& last() const { return last_output_; }
  [[nodiscard]] const FusionConfig& config() const { return config_; }

 private:
  struct Camera {
    geo::LocalPose pose;
    std::int64_t timestamp_ms = 0;
    bool valid = false;
    /// Accumulated SLAM odometry as of the fix (absolute cameras only).
    geo::LocalPose odometry_at_fix = geo::LocalPose::identity();
  };
  struct Transition {
    std::int64_t start_ms = 0;
    std::optional<TrackingMode> from_mode;
    /// Set when a switch interrupts a transition: the last output, carried
    /// forward by SLAM motion like the cameras.
    geo::LocalPose frozen_from;
    geo::LocalPose odometry_at_freeze = geo::LocalPose::identity();
  };

  [[nodiscard]] Camera& camera(TrackingMode mode);
  [[nodiscard]] const Camera& camera(TrackingMode mode) const;
  [[nodiscard]] bool fresh(const Camera& c, std::int64_t now) const;
  /// The camera's pose carried forward to the latest SLAM odometry.
  [[nodiscard]] geo::LocalPose current_pose(TrackingMode mode) const;
  /// `pose`, known when the odometry read `odometry_then`, moved by the
  /// SLAM motion since.
  [[nodiscard]] geo::LocalPose carried(const geo::LocalPose& pose,
                                       const geo::LocalPose& odometry_then) const;
  [[nodiscard]] bool tracks_device(TrackingMode mode, std::int64_t now) const;
  [[nodiscard]] std::optional<double> accuracy_at(std::int64_t now) const;
  [[nodiscard]] TrackingMode select_mode(std::int64_t now, TrackingMode incoming) const;
  void rebase_slam(const geo::LocalPose& pose, std::int64_t now, double accuracy);
  void update_proximity(const geo::LocalPosition& position,
                        std::span<const geo::LocalPosition> points);

  FusionConfig config_;
  Camera sensor_, target_, slam_;
  /// Every SLAM delta ever received, composed; never re-based.
  geo::LocalPose odometry_ = geo::LocalPose::identity();
  double sensor_accuracy_m_ = 0.0;
  double slam_quality_ = 1.0;
  std::optional<double> slam_base_accuracy_m_;
  std::int64_t slam_base_ms_ = 0;
  bool near_content_ = true;
  std::optional<TrackingMode> active_;
  std::optional<Transition> transition_;
  std::optional<std::int64_t> last_ts_;
  std::optional<FusedPose> last_output_;
  std::optional<geo::LocalPosition> last_absolute_;
};

}  // namespace arstage::tracking

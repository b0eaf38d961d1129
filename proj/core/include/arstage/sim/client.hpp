#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "arstage/content/content_item.hpp"
#include "arstage/geo/geodesy.hpp"
#include "arstage/protocol/codec.hpp"
#include "arstage/protocol/messages.hpp"
#include "arstage/sim/scenario.hpp"
#include "arstage/tracking/fusion.hpp"

namespace arstage::sim {

/// Fiducial detectability: within this range and this angle of the camera's
/// forward axis.
inline constexpr double kDetectionRangeM = 15.0;
inline constexpr double kDetectionHalfAngleDeg = 60.0;

/// The detection a camera at `camera_world` reports for `fiducial`, or empty
/// when the fiducial is outside the detectability gate. Rotation noise is
/// applied by the caller.
std::optional<tracking::TargetDetection> synthesize_target_detection(
    const geo::LocalPose& camera_world, const std::string& fiducial_id,
    const tracking::FiducialPlacement& fiducial);

/// One line of a client's session log.
struct LogRecord {
  enum class Kind { Truth, Sent, Received };
  std::int64_t t_ms = 0;
  Kind kind = Kind::Truth;
  /// Truth records: the ground-truth camera pose.
  geo::LocalPose pose;
  /// Sent/received records: the wire message.
  std::string message;
};

/// Writes one JSON object per line:
/// `{"t_ms":..,"type":"truth","position":[..],"orientation":[..]}`,
/// `{"t_ms":..,"type":"sent"|"received","message":{...}}`.
void write_log(std::ostream& out, const std::vector<LogRecord>& log);

/// A scripted AR client, independent of any transport.
///
/// Lifecycle: send hello(); feed every server message to on_wire(); once
/// ready(), call step() until done(). Each step advances the scenario clock
/// by one frame (1 / imu_rate_hz) and returns the encoded messages to send.
/// Given the same scenario and the same server messages, output and log are
/// byte-identical.
class SimClient {
 public:
  explicit SimClient(Scenario scenario);

  [[nodiscard]] const Scenario& scenario() const { return scenario_; }
  [[nodiscard]] const std::string& client_id() const { return scenario_.id(); }

  std::string hello();
  void on_message(const protocol::Message& message);
  /// Records the wire form of a received message in the log, then handles it.
  void on_wire(const std::string& encoded);

  /// The content snapshot has arrived and the path is resolved.
  [[nodiscard]] bool ready() const { return trajectory_.has_value(); }
  [[nodiscard]] bool done() const;
  /// Scenario time of the next frame.
  [[nodiscard]] std::int64_t next_time_ms() const { return frame_ * step_ms_; }
  [[nodiscard]] std::int64_t step_ms() const { return step_ms_; }
  std::vector<std::string> step();

  /// Ground-truth pose at scenario time `t_ms`; requires ready().
  [[nodiscard]] geo::LocalPose truth_at(std::int64_t t_ms) const;
  [[nodiscard]] const geo::FrameAnchor& anchor() const { return *anchor_; }

  /// Ground truth at every frame that produced a pose update.
  [[nodiscard]] const std::map<std::int64_t, geo::LocalPose>& truth() const { return truth_; }
  [[nodiscard]] const std::vector<LogRecord>& log() const { return log_; }
  [[nodiscard]] const std::vector<protocol::ContentDelta>& deltas() const { return deltas_; }
  [[nodiscard]] const std::vector<protocol::ErrorMessage>& errors() const { return errors_; }
  [[nodiscard]] std::uint64_t revision() const { return revision_; }
  [[nodiscard]] const std::map<std::string, content::ContentItem>& items() const { return items_; }
  [[nodiscard]] bool closed() const { return closed_; }
  /// GPS offsets injected so far (noise plus bias), in the local frame.
  [[nodiscard]] const std::vector<geo::Vec3>& gps_offsets() const { return gps_offsets_; }

 private:
  std::string make(protocol::Body body);
  [[nodiscard]] std::int64_t now_ms() const;
  [[nodiscard]] double heading_error_deg(double t_s) const;
  [[nodiscard]] bool dropped(tracking::TrackingMode mode, double t_s) const;
  [[nodiscard]] geo::Vec3 gps_bias(double t_s) const;
  void apply_snapshot(const protocol::ContentSnapshot& snapshot);

  Scenario scenario_;
  std::int64_t step_ms_;
  std::int64_t gps_period_ms_;
  std::mt19937_64 rng_;
  std::uint64_t next_seq_ = 1;
  std::int64_t frame_ = 0;
  std::int64_t next_gps_ms_ = 0;
  std::int64_t next_thumbnail_ms_ = 0;
  std::int64_t next_telemetry_ms_ = 0;
  std::int64_t updates_in_window_ = 0;
  std::optional<geo::LocalPose> previous_truth_;
  tracking::TrackingMode last_mode_ = tracking::TrackingMode::SensorBased;

  protocol::SnapshotAssembler assembler_;
  std::optional<geo::FrameAnchor> anchor_;
  std::optional<Trajectory> trajectory_;
  tracking::FiducialCatalog fiducials_;
  std::map<std::string, content::ContentItem> items_;
  std::uint64_t revision_ = 0;
  bool closed_ = false;

  std::map<std::int64_t, geo::LocalPose> truth_;
  std::vector<LogRecord> log_;
  std::vector<protocol::ContentDelta> deltas_;
  std::vector<protocol::ErrorMessage> errors_;
  std::vector<geo::Vec3> gps_offsets_;
};

}  // namespace arstage::sim

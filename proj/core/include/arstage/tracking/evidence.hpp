#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "arstage/geo/geodesy.hpp"
#include "arstage/geo/pose.hpp"

namespace arstage::tracking {

enum class TrackingMode { SensorBased, TargetBased, SlamBased };

std::string_view to_string(TrackingMode mode);
TrackingMode tracking_mode_from_string(std::string_view name);

/// GPS fix plus IMU/compass absolute orientation.
struct SensorReading {
  geo::GeoPosition geo;
  double horizontal_accuracy_m = 1.0;
  geo::Orientation orientation;
  bool operator==(const SensorReading&) const = default;
};

/// Camera pose relative to a detected fiducial, in the fiducial's frame.
/// Translation is in detector units: multiples of the fiducial's width.
struct TargetDetection {
  std::string fiducial_id;
  geo::LocalPose relative_pose;
  double confidence = 1.0;
  bool operator==(const TargetDetection&) const = default;
};

/// Metric camera motion since the previous SLAM frame, in the previous camera frame.
struct SlamDelta {
  geo::LocalPose delta_pose;
  double tracking_quality = 1.0;
  bool operator==(const SlamDelta&) const = default;
};

struct PoseEvidence {
  std::int64_t timestamp_ms = 0;
  std::variant<SensorReading, TargetDetection, SlamDelta> payload;

  [[nodiscard]] TrackingMode mode() const;
  bool operator==(const PoseEvidence&) const = default;
};

/// Throws ValidationError naming the offending field
/// (e.g. "horizontal_accuracy_m", "confidence").
void validate_evidence(const PoseEvidence& evidence);

}  // namespace arstage::tracking

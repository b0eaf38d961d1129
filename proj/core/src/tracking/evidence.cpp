#include "arstage/tracking/evidence.hpp"

#include <cmath>

#include "arstage/error.hpp"

namespace arstage::tracking {

std::string_view to_string(TrackingMode mode) {
  switch (mode) {
    case TrackingMode::SensorBased:
      return "sensor";
    case TrackingMode::TargetBased:
      return "target";
    case TrackingMode::SlamBased:
      return "slam";
  }
  return "sensor";
}

TrackingMode tracking_mode_from_string(std::string_view name) {
  if (name == "sensor") return TrackingMode::SensorBased;
  if (name == "target") return TrackingMode::TargetBased;
  if (name == "slam") return TrackingMode::SlamBased;
  throw ValidationError("unknown tracking mode '" + std::string(name) + "'");
}

TrackingMode PoseEvidence::mode() const {
  switch (payload.index()) {
    case 0:
      return TrackingMode::SensorBased;
    case 1:
      return TrackingMode::TargetBased;
    default:
      return TrackingMode::SlamBased;
  }
}

namespace {

bool finite_pose(const geo::LocalPose& p) { return p.position.finite(); }

struct Validator {
  void operator()(const SensorReading& s) const {
    (void)geo::validated(s.geo);
    if (!std::isfinite(s.horizontal_accuracy_m) || s.horizontal_accuracy_m <= 0.0) {
      throw ValidationError("horizontal_accuracy_m must be > 0");
    }
  }
  void operator()(const TargetDetection& t) const {
    if (t.fiducial_id.empty()) throw ValidationError("fiducial_id must not be empty");
    if (!(t.confidence >= 0.0 && t.confidence <= 1.0)) {
      throw ValidationError("confidence must be in [0, 1]");
    }
    if (!finite_pose(t.relative_pose)) throw ValidationError("relative_pose must be finite");
  }
  void operator()(const SlamDelta& s) const {
    if (!(s.tracking_quality >= 0.0 && s.tracking_quality <= 1.0)) {
      throw ValidationError("tracking_quality must be in [0, 1]");
    }
    if (!finite_pose(s.delta_pose)) throw ValidationError("delta_pose must be finite");
  }
};

}  // namespace

void validate_evidence(const PoseEvidence& evidence) { std::visit(Validator{}, evidence.payload); }

}  // namespace arstage::tracking

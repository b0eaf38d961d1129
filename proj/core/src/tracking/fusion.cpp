#include "arstage/tracking/fusion.hpp"

#include <algorithm>
#include <limits>

namespace arstage::tracking {

FiducialCatalog build_fiducial_catalog(std::span<const content::ContentItem> items,
                                       const geo::FrameAnchor& anchor) {
  FiducialCatalog out;
  for (const auto& item : items) {
    if (item.kind != content::ContentKind::Fiducial) continue;
    out[item.id] = {{anchor.to_local(item.geo), item.orientation}, item.scale.x};
  }
  return out;
}

geo::LocalPose infer_camera_from_fiducial(const FiducialPlacement& fiducial,
                                          const TargetDetection& detection) {
  if (!(fiducial.width_m > 0.0)) throw ValidationError("fiducial width must be > 0");
  if (!(detection.confidence > 0.0)) throw ValidationError("confidence must be > 0");
  geo::LocalPose rel = detection.relative_pose;
  rel.position = rel.position * fiducial.width_m;
  return geo::compose(fiducial.world, rel);
}

geo::LocalPose relative_pose_from_camera(const FiducialPlacement& fiducial,
                                         const geo::LocalPose& camera_world) {
  if (!(fiducial.width_m > 0.0)) throw ValidationError("fiducial width must be > 0");
  geo::LocalPose rel = geo::compose(geo::inverse(fiducial.world), camera_world);
  rel.position = rel.position / fiducial.width_m;
  return rel;
}

PoseFusion::Camera& PoseFusion::camera(TrackingMode mode) {
  switch (mode) {
    case TrackingMode::TargetBased:
      return target_;
    case TrackingMode::SlamBased:
      return slam_;
    default:
      return sensor_;
  }
}

const PoseFusion::Camera& PoseFusion::camera(TrackingMode mode) const {
  return const_cast<PoseFusion*>(this)->camera(mode);
}

bool PoseFusion::fresh(const Camera& c, std::int64_t now) const {
  return c.valid && now - c.timestamp_ms <= config_.staleness_ms;
}

geo::LocalPose PoseFusion::current_pose(TrackingMode mode) const {
  const Camera& c = camera(mode);
  if (mode == TrackingMode::SlamBased || !c.valid) return c.pose;
  return carried(c.pose, c.odometry_at_fix);
}

geo::LocalPose PoseFusion::carried(const geo::LocalPose& pose,
                                   const geo::LocalPose& odometry_then) const {
  return geo::compose(geo::compose(pose, geo::inverse(odometry_then)), odometry_);
}

bool PoseFusion::tracks_device(TrackingMode mode, std::int64_t now) const {
  const Camera& c = camera(mode);
  if (fresh(c, now)) return true;
  return c.valid && mode != TrackingMode::SlamBased && fresh(slam_, now);
}

std::optional<double> PoseFusion::accuracy_at(std::int64_t now) const {
  if (!active_) return std::nullopt;
  switch (*active_) {
    case TrackingMode::SensorBased:
      return sensor_accuracy_m_;
    case TrackingMode::TargetBased:
      return config_.target_accuracy_m;
    case TrackingMode::SlamBased:
      if (!slam_base_accuracy_m_) return std::nullopt;
      return *slam_base_accuracy_m_ +
             config_.slam_drift_m_per_s * static_cast<double>(now - slam_base_ms_) / 1000.0;
  }
  return std::nullopt;
}

void PoseFusion::rebase_slam(const geo::LocalPose& pose, std::int64_t now, double accuracy) {
  slam_.pose = pose;
  slam_base_ms_ = now;
  slam_base_accuracy_m_ = accuracy;
}

void PoseFusion::update_proximity(const geo::LocalPosition& position,
                                  std::span<const geo::LocalPosition> points) {
  if (points.empty()) {
    near_content_ = true;
    return;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) best = std::min(best, geo::horizontal_distance(position, p));
  if (near_content_) {
    near_content_ = best <= config_.near_m + config_.hysteresis_m;
  } else {
    near_content_ = best < config_.near_m;
  }
}

TrackingMode PoseFusion::select_mode(std::int64_t now, TrackingMode incoming) const {
  if (fresh(target_, now)) return TrackingMode::TargetBased;
  const bool slam_ok = fresh(slam_, now) && slam_quality_ > 0.0;
  const bool sensor_ok = fresh(sensor_, now);
  if (slam_ok && (near_content_ || !sensor_ok)) return TrackingMode::SlamBased;
  if (sensor_ok) return TrackingMode::SensorBased;
  if (active_) return *active_;
  return incoming;
}

FusedPose PoseFusion::ingest(const PoseEvidence& evidence, const FusionContext& context) {
  const std::int64_t now = evidence.timestamp_ms;
  if (last_ts_ && now < *last_ts_) throw TimestampRegression(*last_ts_, now);
  validate_evidence(evidence);

  // Work on a copy so that any throw leaves this state untouched.
  PoseFusion next = *this;
  const bool slam_driving = active_ == TrackingMode::SlamBased;
  std::optional<geo::LocalPosition> absolute_position;

  if (const auto* s = std::get_if<SensorReading>(&evidence.payload)) {
    if (context.anchor == nullptr) throw Error("fusion context has no frame anchor");
    next.sensor_ = {{context.anchor->to_local(geo::validated(s->geo)), s->orientation}, now, true,
                    odometry_};
    next.sensor_accuracy_m_ = s->horizontal_accuracy_m;
    // The SLAM chain follows the best absolute camera; fiducials outrank GPS.
    if (!slam_driving && !fresh(target_, now)) {
      next.rebase_slam(next.sensor_.pose, now, s->horizontal_accuracy_m);
    }
    absolute_position = next.sensor_.pose.position;
  } else if (const auto* t = std::get_if<TargetDetection>(&evidence.payload)) {
    const FiducialCatalog* catalog = context.fiducials;
    auto it = catalog ? catalog->find(t->fiducial_id) : FiducialCatalog::const_iterator{};
    if (catalog == nullptr || it == catalog->end()) {
      throw NotFoundError("unknown fiducial '" + t->fiducial_id + "'");
    }
    next.target_ = {infer_camera_from_fiducial(it->second, *t), now, true, odometry_};
    if (!slam_driving) next.rebase_slam(next.target_.pose, now, config_.target_accuracy_m);
    absolute_position = next.target_.pose.position;
  } else {
    const auto& d = std::get<SlamDelta>(evidence.payload);
    if (!slam_.valid && !slam_base_accuracy_m_) {
      // No absolute fix yet: relative coordinates from the anchor origin.
      next.slam_base_ms_ = now;
    }
    next.odometry_ = geo::compose(odometry_, d.delta_pose);
    // Fixes taken at this same instant already include this motion.
    for (Camera* c : {&next.sensor_, &next.target_}) {
      if (c->valid && c->timestamp_ms >= now) c->odometry_at_fix = next.odometry_;
    }
    if (!(slam_base_accuracy_m_ && slam_base_ms_ >= now)) {
      next.slam_.pose = geo::compose(next.slam_.pose, d.delta_pose);
    }
    next.slam_quality_ = d.tracking_quality;
  }
  if (evidence.mode() == TrackingMode::SlamBased) {
    next.slam_.timestamp_ms = now;
    next.slam_.valid = true;
  }

  // Proximity is judged from the freshest absolute fix, or from the SLAM chain
  // once it has been anchored to one; blended output poses are never used.
  if (absolute_position) next.last_absolute_ = absolute_position;
  geo::LocalPosition probe = next.slam_.pose.position;
  if (absolute_position) {
    probe = *absolute_position;
  } else if (!next.slam_base_accuracy_m_ && next.last_absolute_) {
    probe = *next.last_absolute_;
  }
  next.update_proximity(probe, context.content_points);

  const TrackingMode selected = next.select_mode(now, evidence.mode());
  if (!next.active_) {
    next.active_ = selected;
  } else if (selected != *next.active_) {
    Transition tr;
    tr.start_ms = now;
    if (next.transition_ && last_output_) {
      tr.frozen_from = last_output_->pose;
      tr.odometry_at_freeze = odometry_;
      next.transition_ = tr;
    } else if (next.tracks_device(*next.active_, now)) {
      tr.from_mode = *next.active_;
      next.transition_ = tr;
    } else {
      next.transition_.reset();
    }
    next.active_ = selected;
  }

  FusedPose out;
  out.active_mode = *next.active_;
  out.timestamp_ms = now;
  const geo::LocalPose target_pose = next.current_pose(*next.active_);
  out.pose = target_pose;
  out.blend_weight = 1.0;
  if (next.transition_) {
    const double w =
        config_.transition_ms <= 0
            ? 1.0
            : static_cast<double>(now - next.transition_->start_ms) /
                  static_cast<double>(config_.transition_ms);
    if (w >= 1.0) {
      next.transition_.reset();
    } else {
      const geo::LocalPose from = next.transition_->from_mode
                                      ? next.current_pose(*next.transition_->from_mode)
                                      : next.carried(next.transition_->frozen_from,
                                                     next.transition_->odometry_at_freeze);
      out.pose = geo::interpolate(from, target_pose, w);
      out.blend_weight = w;
    }
  }
  next.last_ts_ = now;
  out.horizontal_accuracy_m = next.accuracy_at(now);
  next.last_output_ = out;
  *this = std::move(next);
  return out;
}

}  // namespace arstage::tracking

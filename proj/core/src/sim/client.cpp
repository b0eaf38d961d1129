#include "arstage/sim/client.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace arstage::sim {

namespace {

using tracking::TrackingMode;

std::int64_t period_ms(double rate_hz) {
  return std::max<std::int64_t>(1, std::llround(1000.0 / rate_hz));
}

int priority(TrackingMode mode) {
  switch (mode) {
    case TrackingMode::TargetBased:
      return 2;
    case TrackingMode::SlamBased:
      return 1;
    default:
      return 0;
  }
}

}  // namespace

std::optional<tracking::TargetDetection> synthesize_target_detection(
    const geo::LocalPose& camera_world, const std::string& fiducial_id,
    const tracking::FiducialPlacement& fiducial) {
  const geo::Vec3 to_fiducial = fiducial.world.position - camera_world.position;
  const double distance = to_fiducial.norm();
  if (distance > kDetectionRangeM) return std::nullopt;
  if (distance > 0.0) {
    const double cos_angle = camera_world.orientation.forward().dot(to_fiducial) / distance;
    const double angle = geo::rad_to_deg(std::acos(std::clamp(cos_angle, -1.0, 1.0)));
    if (angle > kDetectionHalfAngleDeg) return std::nullopt;
  }
  return tracking::TargetDetection{fiducial_id,
                                   tracking::relative_pose_from_camera(fiducial, camera_world), 1.0};
}

void write_log(std::ostream& out, const std::vector<LogRecord>& log) {
  for (const auto& r : log) {
    nlohmann::json j{{"t_ms", r.t_ms}};
    switch (r.kind) {
      case LogRecord::Kind::Truth: {
        const auto& p = r.pose;
        j["type"] = "truth";
        j["position"] = {p.position.x, p.position.y, p.position.z};
        j["orientation"] = {p.orientation.w(), p.orientation.x(), p.orientation.y(),
                            p.orientation.z()};
        break;
      }
      case LogRecord::Kind::Sent:
      case LogRecord::Kind::Received:
        j["type"] = r.kind == LogRecord::Kind::Sent ? "sent" : "received";
        j["message"] = nlohmann::json::parse(r.message);
        break;
    }
    out << j.dump() << '\n';
  }
}

SimClient::SimClient(Scenario scenario)
    : scenario_(std::move(scenario)),
      step_ms_(period_ms(scenario_.noise.imu_rate_hz)),
      gps_period_ms_(period_ms(scenario_.noise.gps_rate_hz)),
      rng_(scenario_.noise.seed) {
  validate_scenario(scenario_);
  if (scenario_.telemetry_rate_hz > 0) next_telemetry_ms_ = period_ms(scenario_.telemetry_rate_hz);
}

std::int64_t SimClient::now_ms() const { return frame_ == 0 ? 0 : (frame_ - 1) * step_ms_; }

std::string SimClient::make(protocol::Body body) {
  std::string encoded = protocol::encode({next_seq_++, std::move(body)});
  log_.push_back({now_ms(), LogRecord::Kind::Sent, {}, encoded});
  return encoded;
}

std::string SimClient::hello() {
  return make(protocol::ClientHello{client_id(), protocol::Role::Client, scenario_.profile,
                                    protocol::kProtocolVersion});
}

void SimClient::on_wire(const std::string& encoded) {
  log_.push_back({now_ms(), LogRecord::Kind::Received, {}, encoded});
  on_message(protocol::decode(encoded));
}

void SimClient::on_message(const protocol::Message& message) {
  if (const auto* s = std::get_if<protocol::ContentSnapshot>(&message.body)) {
    if (auto full = assembler_.add(*s)) apply_snapshot(*full);
  } else if (const auto* d = std::get_if<protocol::ContentDelta>(&message.body)) {
    deltas_.push_back(*d);
    for (const auto& item : d->changed) items_[item.id] = item;
    for (const auto& id : d->removed) items_.erase(id);
    revision_ = d->revision;
    if (anchor_) {
      std::vector<content::ContentItem> all;
      for (const auto& [id, item] : items_) all.push_back(item);
      fiducials_ = tracking::build_fiducial_catalog(all, *anchor_);
    }
  } else if (const auto* e = std::get_if<protocol::ErrorMessage>(&message.body)) {
    errors_.push_back(*e);
    if (e->code == protocol::ErrorCode::Replaced ||
        e->code == protocol::ErrorCode::VersionMismatch) {
      closed_ = true;
    }
  }
}

void SimClient::apply_snapshot(const protocol::ContentSnapshot& snapshot) {
  items_.clear();
  for (const auto& item : snapshot.items) items_[item.id] = item;
  revision_ = snapshot.revision;
  if (!anchor_) {
    anchor_ = geo::make_anchor(snapshot.origin);
    trajectory_.emplace(scenario_, *anchor_);
  }
  fiducials_ = tracking::build_fiducial_catalog(snapshot.items, *anchor_);
}

bool SimClient::done() const {
  if (closed_) return true;
  if (!trajectory_) return false;
  return next_time_ms() > std::llround(trajectory_->duration_s() * 1000.0);
}

geo::LocalPose SimClient::truth_at(std::int64_t t_ms) const {
  return trajectory_->pose_at(static_cast<double>(t_ms) / 1000.0);
}

double SimClient::heading_error_deg(double t_s) const {
  double err = scenario_.noise.compass_bias_deg + scenario_.noise.gyro_drift_deg_s * t_s;
  for (const auto& f : scenario_.faults) {
    const auto* g = std::get_if<GyroDrift>(&f.kind);
    if (g == nullptr || !f.active_at(t_s)) continue;
    const double grown = std::min(std::abs(g->deg_s) * (t_s - f.start_s), g->max_deg);
    err += std::copysign(grown, g->deg_s);
  }
  return err;
}

bool SimClient::dropped(TrackingMode mode, double t_s) const {
  for (const auto& f : scenario_.faults) {
    const auto* d = std::get_if<Dropout>(&f.kind);
    if (d != nullptr && d->mode == mode && f.active_at(t_s)) return true;
  }
  return false;
}

geo::Vec3 SimClient::gps_bias(double t_s) const {
  geo::Vec3 bias{0, 0, 0};
  for (const auto& f : scenario_.faults) {
    const auto* b = std::get_if<GpsBias>(&f.kind);
    if (b != nullptr && f.active_at(t_s)) bias = bias + b->offset_m;
  }
  return bias;
}

std::vector<std::string> SimClient::step() {
  std::vector<std::string> out;
  if (!ready() || done()) return out;
  const std::int64_t t = next_time_ms();
  const double t_s = static_cast<double>(t) / 1000.0;
  ++frame_;
  const geo::LocalPose truth = truth_at(t);
  const NoiseModel& noise = scenario_.noise;
  std::optional<TrackingMode> best;
  auto sent = [&](TrackingMode mode) {
    if (!best || priority(mode) > priority(*best)) best = mode;
  };

  if (t >= next_gps_ms_) {
    while (next_gps_ms_ <= t) next_gps_ms_ += gps_period_ms_;
    geo::Vec3 offset{0, 0, 0};
    if (noise.gps_sigma_m > 0) {
      std::normal_distribution<double> n(0.0, noise.gps_sigma_m);
      offset.x = n(rng_);
      offset.z = n(rng_);
    }
    offset = offset + gps_bias(t_s);
    if (!dropped(TrackingMode::SensorBased, t_s)) {
      gps_offsets_.push_back(offset);
      const geo::Orientation measured =
          geo::Orientation::yaw(geo::deg_to_rad(heading_error_deg(t_s))) * truth.orientation;
      tracking::SensorReading reading{anchor_->to_geo(truth.position + offset),
                                      noise.accuracy_m(), measured};
      out.push_back(make(protocol::PoseUpdate{client_id(), {t, reading}}));
      sent(TrackingMode::SensorBased);
    }
  }

  if (scenario_.fiducials && !dropped(TrackingMode::TargetBased, t_s)) {
    std::optional<tracking::TargetDetection> nearest;
    double nearest_m = 0.0;
    for (const auto& [id, fiducial] : fiducials_) {
      auto detection = synthesize_target_detection(truth, id, fiducial);
      const double d = geo::distance(truth.position, fiducial.world.position);
      if (detection && (!nearest || d < nearest_m)) {
        nearest = std::move(detection);
        nearest_m = d;
      }
    }
    if (nearest) {
      if (noise.detection_rot_sigma_deg > 0) {
        std::normal_distribution<double> n(0.0, 1.0);
        const geo::Vec3 axis{n(rng_), n(rng_), n(rng_)};
        const double angle = geo::deg_to_rad(noise.detection_rot_sigma_deg) * n(rng_);
        if (axis.norm() > 0) {
          nearest->relative_pose.orientation =
              nearest->relative_pose.orientation * geo::Orientation::from_axis_angle(axis, angle);
        }
      }
      out.push_back(make(protocol::PoseUpdate{client_id(), {t, *nearest}}));
      sent(TrackingMode::TargetBased);
    }
  }

  if (scenario_.slam && previous_truth_ && !dropped(TrackingMode::SlamBased, t_s)) {
    tracking::SlamDelta delta{geo::compose(geo::inverse(*previous_truth_), truth), 1.0};
    out.push_back(make(protocol::PoseUpdate{client_id(), {t, delta}}));
    sent(TrackingMode::SlamBased);
  }
  previous_truth_ = truth;

  if (best) {
    truth_[t] = truth;
    log_.push_back({t, LogRecord::Kind::Truth, truth, {}});
    last_mode_ = *best;
    ++updates_in_window_;
    if (scenario_.thumbnail_rate_hz > 0 && t >= next_thumbnail_ms_) {
      next_thumbnail_ms_ = t + period_ms(scenario_.thumbnail_rate_hz);
      out.push_back(make(protocol::FrameThumbnail{client_id(), t, anchor_->to_geo(truth.position),
                                                  truth.orientation, ""}));
    }
  }
  if (scenario_.telemetry_rate_hz > 0 && t >= next_telemetry_ms_) {
    const std::int64_t window = period_ms(scenario_.telemetry_rate_hz);
    next_telemetry_ms_ = t + window;
    protocol::Telemetry telemetry{client_id(),
                                  scenario_.render_fps,
                                  static_cast<double>(updates_in_window_) * 1000.0 /
                                      static_cast<double>(window),
                                  last_mode_,
                                  noise.accuracy_m(),
                                  std::nullopt};
    updates_in_window_ = 0;
    out.push_back(make(telemetry));
  }
  return out;
}

}  // namespace arstage::sim

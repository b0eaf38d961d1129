#include "arstage/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "detail/json_fields.hpp"
#include "detail/profile_json.hpp"

namespace arstage::sim {

namespace {

using nlohmann::ordered_json;
using namespace arstage::detail;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& path) {
  const auto extra = unknown_keys(obj, known);
  if (!extra.empty()) throw FieldError(join(path, extra.front()), "unknown key");
}

void read(const json& obj, std::string_view key, const std::string& path, double& out) {
  if (const json* v = optional(obj, key)) out = as_number(*v, join(path, key));
}

void read(const json& obj, std::string_view key, const std::string& path, bool& out) {
  if (const json* v = optional(obj, key)) out = as_bool(*v, join(path, key));
}

void require_that(bool ok, const std::string& where, const std::string& message) {
  if (!ok) throw ScenarioError(where, message);
}

geo::GeoPosition parse_geo(const json& j, const std::string& path) {
  geo::GeoPosition g;
  g.latitude_deg = number_field(j, "lat", path);
  g.longitude_deg = number_field(j, "lon", path);
  g.height_m = number_field_or(j, "height", path, 0.0);
  try {
    return geo::validated(g);
  } catch (const ValidationError& e) {
    throw FieldError(path, e.what());
  }
}

FaultInjection parse_fault(const json& j, const std::string& path) {
  require_object(j, path);
  FaultInjection f;
  f.start_s = number_field(j, "start_s", path);
  f.duration_s = number_field(j, "duration_s", path);
  const std::string kind = string_field(j, "kind", path);
  if (kind == "gps_bias") {
    reject_unknown(j, {"kind", "start_s", "duration_s", "offset_m"}, path);
    f.kind = GpsBias{as_vec3(require(j, "offset_m", path), join(path, "offset_m"))};
  } else if (kind == "gyro_drift") {
    reject_unknown(j, {"kind", "start_s", "duration_s", "deg_s", "max_deg"}, path);
    GyroDrift g;
    g.deg_s = number_field(j, "deg_s", path);
    g.max_deg = number_field_or(j, "max_deg", path, g.max_deg);
    f.kind = g;
  } else if (kind == "dropout") {
    reject_unknown(j, {"kind", "start_s", "duration_s", "mode"}, path);
    try {
      f.kind = Dropout{tracking::tracking_mode_from_string(string_field(j, "mode", path))};
    } catch (const ValidationError& e) {
      throw FieldError(join(path, "mode"), e.what());
    }
  } else {
    throw FieldError(join(path, "kind"), "expected gps_bias, gyro_drift or dropout");
  }
  return f;
}

double heading_between(const geo::LocalPosition& a, const geo::LocalPosition& b,
                       double fallback_deg) {
  const double dx = b.x - a.x;
  const double dz = b.z - a.z;
  if (std::hypot(dx, dz) < 1e-9) return fallback_deg;
  return geo::rad_to_deg(std::atan2(dx, dz));
}

}  // namespace

double NoiseModel::accuracy_m() const {
  return reported_accuracy_m.value_or(std::max(0.1, 1.51 * gps_sigma_m));
}

std::string_view FaultInjection::kind_name() const {
  switch (kind.index()) {
    case 0:
      return "gps_bias";
    case 1:
      return "gyro_drift";
    default:
      return "dropout";
  }
}

void validate_scenario(const Scenario& s) {
  require_that(!s.id().empty(), "name", "must not be empty");
  require_that(!s.path.empty(), "path", "needs at least one waypoint");
  for (std::size_t i = 0; i < s.path.size(); ++i) {
    require_that(geo::is_valid(s.path[i].geo), index("path", i), "invalid position");
    require_that(s.path[i].dwell_s >= 0, index("path", i) + ".dwell_s", "must be >= 0");
  }
  require_that(s.speed_m_s > 0, "speed_m_s", "must be > 0");
  try {
    viewsim::validate_profile(s.profile);
  } catch (const ValidationError& e) {
    throw ScenarioError("profile", e.what());
  }
  const NoiseModel& n = s.noise;
  require_that(n.gps_sigma_m >= 0, "noise.gps_sigma_m", "must be >= 0");
  require_that(!n.reported_accuracy_m || *n.reported_accuracy_m > 0, "noise.reported_accuracy_m",
               "must be > 0");
  require_that(n.gps_rate_hz > 0 && n.gps_rate_hz <= 1000, "noise.gps_rate_hz",
               "must be in (0, 1000]");
  require_that(n.imu_rate_hz > 0 && n.imu_rate_hz <= 1000, "noise.imu_rate_hz",
               "must be in (0, 1000]");
  require_that(std::isfinite(n.gyro_drift_deg_s), "noise.gyro_drift_deg_s", "must be finite");
  require_that(std::isfinite(n.compass_bias_deg), "noise.compass_bias_deg", "must be finite");
  require_that(n.detection_rot_sigma_deg >= 0, "noise.detection_rot_sigma_deg", "must be >= 0");
  require_that(s.thumbnail_rate_hz >= 0, "thumbnail_rate_hz", "must be >= 0");
  require_that(s.telemetry_rate_hz >= 0, "telemetry_rate_hz", "must be >= 0");
  require_that(s.render_fps >= 0, "render_fps", "must be >= 0");
  for (std::size_t i = 0; i < s.faults.size(); ++i) {
    const auto& f = s.faults[i];
    const std::string where = index("faults", i);
    require_that(f.start_s >= 0, where + ".start_s", "must be >= 0");
    require_that(f.duration_s > 0, where + ".duration_s", "must be > 0");
    if (const auto* g = std::get_if<GyroDrift>(&f.kind)) {
      require_that(std::isfinite(g->deg_s), where + ".deg_s", "must be finite");
      require_that(g->max_deg >= 0, where + ".max_deg", "must be >= 0");
    }
    if (const auto* b = std::get_if<GpsBias>(&f.kind)) {
      require_that(std::isfinite(b->offset_m.norm()), where + ".offset_m", "must be finite");
    }
    for (std::size_t k = 0; k < i; ++k) {
      const auto& o = s.faults[k];
      if (o.kind.index() != f.kind.index()) continue;
      const bool overlap =
          f.start_s < o.start_s + o.duration_s && o.start_s < f.start_s + f.duration_s;
      require_that(!overlap, where, "overlaps faults[" + std::to_string(k) + "] of the same kind");
    }
  }
}

Scenario scenario_from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ScenarioError("line " + std::to_string(line) + ", column " + std::to_string(col),
                        "malformed JSON");
  }
  Scenario s;
  try {
    require_object(root, "");
    reject_unknown(root,
                   {"name", "client_id", "profile", "path", "speed_m_s", "noise", "faults", "slam",
                    "fiducials", "thumbnail_rate_hz", "telemetry_rate_hz", "render_fps"},
                   "");
    s.name = string_field(root, "name", "");
    if (const json* v = optional(root, "client_id")) s.client_id = as_string(*v, "client_id");
    const json& profile = require(root, "profile", "");
    if (profile.is_string()) {
      try {
        s.profile = viewsim::profile_preset(profile.get<std::string>());
      } catch (const Error& e) {
        throw FieldError("profile", e.what());
      }
    } else {
      s.profile = parse_profile(profile, "profile");
    }
    const json& path = as_array(require(root, "path", ""), "path");
    for (std::size_t i = 0; i < path.size(); ++i) {
      const std::string where = index("path", i);
      require_object(path[i], where);
      reject_unknown(path[i], {"lat", "lon", "height", "dwell_s"}, where);
      s.path.push_back({parse_geo(path[i], where), number_field_or(path[i], "dwell_s", where, 0)});
    }
    read(root, "speed_m_s", "", s.speed_m_s);
    if (const json* n = optional(root, "noise")) {
      require_object(*n, "noise");
      reject_unknown(*n,
                     {"gps_sigma_m", "reported_accuracy_m", "gps_rate_hz", "imu_rate_hz",
                      "gyro_drift_deg_s", "compass_bias_deg", "detection_rot_sigma_deg", "seed"},
                     "noise");
      read(*n, "gps_sigma_m", "noise", s.noise.gps_sigma_m);
      if (const json* v = optional(*n, "reported_accuracy_m")) {
        s.noise.reported_accuracy_m = as_number(*v, "noise.reported_accuracy_m");
      }
      read(*n, "gps_rate_hz", "noise", s.noise.gps_rate_hz);
      read(*n, "imu_rate_hz", "noise", s.noise.imu_rate_hz);
      read(*n, "gyro_drift_deg_s", "noise", s.noise.gyro_drift_deg_s);
      read(*n, "compass_bias_deg", "noise", s.noise.compass_bias_deg);
      read(*n, "detection_rot_sigma_deg", "noise", s.noise.detection_rot_sigma_deg);
      if (const json* v = optional(*n, "seed")) s.noise.seed = as_uint(*v, "noise.seed");
    }
    if (const json* faults = optional(root, "faults")) {
      as_array(*faults, "faults");
      for (std::size_t i = 0; i < faults->size(); ++i) {
        s.faults.push_back(parse_fault((*faults)[i], index("faults", i)));
      }
    }
    read(root, "slam", "", s.slam);
    read(root, "fiducials", "", s.fiducials);
    read(root, "thumbnail_rate_hz", "", s.thumbnail_rate_hz);
    read(root, "telemetry_rate_hz", "", s.telemetry_rate_hz);
    read(root, "render_fps", "", s.render_fps);
  } catch (const FieldError& e) {
    throw ScenarioError(e.path(), e.detail());
  }
  validate_scenario(s);
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json root;
  root["name"] = s.name;
  if (!s.client_id.empty()) root["client_id"] = s.client_id;
  root["profile"] = ordered_json::parse(profile_json(s.profile).dump());
  root["speed_m_s"] = s.speed_m_s;
  root["path"] = ordered_json::array();
  for (const auto& w : s.path) {
    root["path"].push_back({{"lat", w.geo.latitude_deg},
                            {"lon", w.geo.longitude_deg},
                            {"height", w.geo.height_m},
                            {"dwell_s", w.dwell_s}});
  }
  ordered_json noise{{"gps_sigma_m", s.noise.gps_sigma_m},
                     {"gps_rate_hz", s.noise.gps_rate_hz},
                     {"imu_rate_hz", s.noise.imu_rate_hz},
                     {"gyro_drift_deg_s", s.noise.gyro_drift_deg_s},
                     {"compass_bias_deg", s.noise.compass_bias_deg},
                     {"detection_rot_sigma_deg", s.noise.detection_rot_sigma_deg},
                     {"seed", s.noise.seed}};
  if (s.noise.reported_accuracy_m) noise["reported_accuracy_m"] = *s.noise.reported_accuracy_m;
  root["noise"] = noise;
  root["faults"] = ordered_json::array();
  for (const auto& f : s.faults) {
    ordered_json j{{"kind", f.kind_name()}, {"start_s", f.start_s}, {"duration_s", f.duration_s}};
    if (const auto* b = std::get_if<GpsBias>(&f.kind)) {
      j["offset_m"] = {b->offset_m.x, b->offset_m.y, b->offset_m.z};
    } else if (const auto* g = std::get_if<GyroDrift>(&f.kind)) {
      j["deg_s"] = g->deg_s;
      j["max_deg"] = g->max_deg;
    } else {
      j["mode"] = tracking::to_string(std::get<Dropout>(f.kind).mode);
    }
    root["faults"].push_back(j);
  }
  root["slam"] = s.slam;
  root["fiducials"] = s.fiducials;
  root["thumbnail_rate_hz"] = s.thumbnail_rate_hz;
  root["telemetry_rate_hz"] = s.telemetry_rate_hz;
  root["render_fps"] = s.render_fps;
  return root.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

Trajectory::Trajectory(const Scenario& scenario, const geo::FrameAnchor& anchor) {
  validate_scenario(scenario);
  std::vector<geo::LocalPosition> points;
  for (const auto& w : scenario.path) points.push_back(anchor.to_local(w.geo));

  double first_heading = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (std::hypot(points[i + 1].x - points[i].x, points[i + 1].z - points[i].z) >= 1e-9) {
      first_heading = heading_between(points[i], points[i + 1], 0.0);
      break;
    }
  }
  double t = 0.0;
  double heading = first_heading;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    Leg leg;
    leg.start_s = t;
    leg.dwell_end_s = t + scenario.path[i].dwell_s;
    leg.end_s = leg.dwell_end_s + geo::distance(points[i], points[i + 1]) / scenario.speed_m_s;
    leg.from = points[i];
    leg.to = points[i + 1];
    leg.arrive_heading_deg = heading;
    leg.heading_deg = heading_between(points[i], points[i + 1], heading);
    heading = leg.heading_deg;
    t = leg.end_s;
    legs_.push_back(leg);
  }
  last_ = points.back();
  last_heading_deg_ = heading;
  duration_s_ = t + scenario.path.back().dwell_s;
}

geo::LocalPose Trajectory::pose_at(double t_s) const {
  for (const auto& leg : legs_) {
    if (t_s >= leg.end_s) continue;
    if (t_s < leg.dwell_end_s) {
      return {leg.from, geo::heading_to_orientation(leg.arrive_heading_deg)};
    }
    const double travel = leg.end_s - leg.dwell_end_s;
    const double f = travel > 0 ? (t_s - leg.dwell_end_s) / travel : 1.0;
    return {leg.from + (leg.to - leg.from) * f, geo::heading_to_orientation(leg.heading_deg)};
  }
  return {last_, geo::heading_to_orientation(last_heading_deg_)};
}

}  // namespace arstage::sim

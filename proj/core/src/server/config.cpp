#include "arstage/server/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "detail/json_fields.hpp"

namespace arstage::server {

namespace {

using nlohmann::ordered_json;
using namespace arstage::detail;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& path) {
  const auto extra = unknown_keys(obj, known);
  if (!extra.empty()) throw FieldError(join(path, extra.front()), "unknown key");
}

template <class T>
void read_number(const json& obj, std::string_view key, const std::string& path, T& out) {
  if (const json* v = optional(obj, key)) {
    if constexpr (std::is_integral_v<T>) {
      out = static_cast<T>(as_int(*v, join(path, key)));
    } else {
      out = as_number(*v, join(path, key));
    }
  }
}

void require_that(bool ok, const std::string& where, const std::string& message) {
  if (!ok) throw ConfigError(where, message);
}

}  // namespace

std::int64_t ServerConfig::tick_ms() const {
  return std::max<std::int64_t>(1, std::llround(1000.0 / tick_hz));
}

void validate_config(const ServerConfig& c) {
  require_that(c.bind_addr.find(':') != std::string::npos, "bind_addr", "expected host:port");
  require_that(c.tick_hz > 0 && c.tick_hz <= 1000, "tick_hz", "must be in (0, 1000]");
  require_that(c.fusion.staleness_ms > 0, "fusion.staleness_ms", "must be > 0");
  require_that(c.fusion.transition_ms >= 0, "fusion.transition_ms", "must be >= 0");
  require_that(c.fusion.near_m >= 0, "fusion.near_m", "must be >= 0");
  require_that(c.fusion.hysteresis_m >= 0, "fusion.hysteresis_m", "must be >= 0");
  require_that(c.fusion.slam_drift_m_per_s >= 0, "fusion.slam_drift_m_per_s", "must be >= 0");
  require_that(c.fusion.target_accuracy_m > 0, "fusion.target_accuracy_m", "must be > 0");
  require_that(c.thresholds.rot_deg > 0, "thresholds.rot_deg", "must be > 0");
  require_that(c.thresholds.pos_m > 0, "thresholds.pos_m", "must be > 0");
  require_that(c.thresholds.too_close_m >= 0, "thresholds.too_close_m", "must be >= 0");
  require_that(c.thresholds.unreadable_deg >= 0, "thresholds.unreadable_deg", "must be >= 0");
  require_that(c.thresholds.overlap_frac >= 0 && c.thresholds.overlap_frac <= 1,
               "thresholds.overlap_frac", "must be in [0, 1]");
  require_that(c.thresholds.attention_radius_m >= 0, "thresholds.attention_radius_m",
               "must be >= 0");
  require_that(c.client_timeout_ms > 0, "client_timeout_ms", "must be > 0");
  require_that(std::isfinite(c.eye_height_m), "eye_height_m", "must be finite");
}

ServerConfig config_from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col),
                      "malformed JSON");
  }
  ServerConfig c;
  try {
    require_object(root, "");
    reject_unknown(root,
                   {"bind_addr", "tick_hz", "fusion", "thresholds", "auth_token",
                    "client_timeout_ms", "eye_height_m", "avatar_mode", "static_dir", "autosave"},
                   "");
    if (const json* v = optional(root, "bind_addr")) c.bind_addr = as_string(*v, "bind_addr");
    read_number(root, "tick_hz", "", c.tick_hz);
    if (const json* f = optional(root, "fusion")) {
      require_object(*f, "fusion");
      reject_unknown(*f,
                     {"staleness_ms", "transition_ms", "near_m", "hysteresis_m",
                      "slam_drift_m_per_s", "target_accuracy_m"},
                     "fusion");
      read_number(*f, "staleness_ms", "fusion", c.fusion.staleness_ms);
      read_number(*f, "transition_ms", "fusion", c.fusion.transition_ms);
      read_number(*f, "near_m", "fusion", c.fusion.near_m);
      read_number(*f, "hysteresis_m", "fusion", c.fusion.hysteresis_m);
      read_number(*f, "slam_drift_m_per_s", "fusion", c.fusion.slam_drift_m_per_s);
      read_number(*f, "target_accuracy_m", "fusion", c.fusion.target_accuracy_m);
    }
    if (const json* t = optional(root, "thresholds")) {
      require_object(*t, "thresholds");
      reject_unknown(*t,
                     {"rot_deg", "pos_m", "too_close_m", "unreadable_deg", "overlap_frac",
                      "clutter_n", "attention_radius_m"},
                     "thresholds");
      read_number(*t, "rot_deg", "thresholds", c.thresholds.rot_deg);
      read_number(*t, "pos_m", "thresholds", c.thresholds.pos_m);
      read_number(*t, "too_close_m", "thresholds", c.thresholds.too_close_m);
      read_number(*t, "unreadable_deg", "thresholds", c.thresholds.unreadable_deg);
      read_number(*t, "overlap_frac", "thresholds", c.thresholds.overlap_frac);
      if (const json* v = optional(*t, "clutter_n")) {
        c.thresholds.clutter_n = static_cast<std::size_t>(as_uint(*v, "thresholds.clutter_n"));
      }
      read_number(*t, "attention_radius_m", "thresholds", c.thresholds.attention_radius_m);
    }
    if (const json* v = optional(root, "auth_token")) c.auth_token = as_string(*v, "auth_token");
    read_number(root, "client_timeout_ms", "", c.client_timeout_ms);
    read_number(root, "eye_height_m", "", c.eye_height_m);
    if (const json* v = optional(root, "avatar_mode")) {
      try {
        c.avatar_mode = protocol::avatar_mode_from_string(as_string(*v, "avatar_mode"));
      } catch (const ValidationError& e) {
        throw FieldError("avatar_mode", e.what());
      }
    }
    if (const json* v = optional(root, "static_dir")) c.static_dir = as_string(*v, "static_dir");
    if (const json* v = optional(root, "autosave")) c.autosave = as_bool(*v, "autosave");
  } catch (const FieldError& e) {
    throw ConfigError(e.path(), e.detail());
  }
  validate_config(c);
  return c;
}

std::string config_to_json(const ServerConfig& c) {
  ordered_json root;
  root["bind_addr"] = c.bind_addr;
  root["tick_hz"] = c.tick_hz;
  root["fusion"] = {{"staleness_ms", c.fusion.staleness_ms},
                    {"transition_ms", c.fusion.transition_ms},
                    {"near_m", c.fusion.near_m},
                    {"hysteresis_m", c.fusion.hysteresis_m},
                    {"slam_drift_m_per_s", c.fusion.slam_drift_m_per_s},
                    {"target_accuracy_m", c.fusion.target_accuracy_m}};
  root["thresholds"] = {{"rot_deg", c.thresholds.rot_deg},
                        {"pos_m", c.thresholds.pos_m},
                        {"too_close_m", c.thresholds.too_close_m},
                        {"unreadable_deg", c.thresholds.unreadable_deg},
                        {"overlap_frac", c.thresholds.overlap_frac},
                        {"clutter_n", c.thresholds.clutter_n},
                        {"attention_radius_m", c.thresholds.attention_radius_m}};
  root["auth_token"] = c.auth_token;
  root["client_timeout_ms"] = c.client_timeout_ms;
  root["eye_height_m"] = c.eye_height_m;
  root["avatar_mode"] = std::string(protocol::to_string(c.avatar_mode));
  root["static_dir"] = c.static_dir;
  root["autosave"] = c.autosave;
  return root.dump(2) + "\n";
}

ServerConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

}  // namespace arstage::server

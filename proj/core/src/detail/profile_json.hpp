#pragma once

// DeviceProfile <-> JSON, shared by the wire codec and scenario files.

#include "arstage/viewsim/device_profile.hpp"
#include "detail/json_fields.hpp"

namespace arstage::detail {

inline int positive_int(const json& obj, std::string_view key, const std::string& path) {
  const auto v = as_int(require(obj, key, path), join(path, key));
  if (v <= 0 || v > 1'000'000) throw FieldError(join(path, key), "must be in [1, 1000000]");
  return static_cast<int>(v);
}

inline json profile_json(const viewsim::DeviceProfile& p) {
  return {{"model", p.model},
          {"os", p.os},
          {"screen_w_px", p.screen_w_px},
          {"screen_h_px", p.screen_h_px},
          {"camera_vfov_deg", p.camera_vfov_deg},
          {"camera_res_w_px", p.camera_res_w_px},
          {"camera_res_h_px", p.camera_res_h_px}};
}

inline viewsim::DeviceProfile parse_profile(const json& j, const std::string& path) {
  require_object(j, path);
  viewsim::DeviceProfile p;
  p.model = string_field(j, "model", path);
  p.os = string_field(j, "os", path);
  p.screen_w_px = positive_int(j, "screen_w_px", path);
  p.screen_h_px = positive_int(j, "screen_h_px", path);
  p.camera_vfov_deg = number_field(j, "camera_vfov_deg", path);
  if (!(p.camera_vfov_deg > 10.0 && p.camera_vfov_deg < 170.0)) {
    throw FieldError(join(path, "camera_vfov_deg"), "must be in (10, 170)");
  }
  p.camera_res_w_px = positive_int(j, "camera_res_w_px", path);
  p.camera_res_h_px = positive_int(j, "camera_res_h_px", path);
  return p;
}

}  // namespace arstage::detail

#include "arstage/viewsim/device_profile.hpp"

#include <cmath>
#include <map>

#include "arstage/error.hpp"

namespace arstage::viewsim {

namespace {

void require_positive(int value, const char* field) {
  if (value <= 0) throw ValidationError(std::string(field) + " must be > 0");
}

const std::map<std::string, DeviceProfile, std::less<>>& presets() {
  static const std::map<std::string, DeviceProfile, std::less<>> table{
      {"iphone-x", {"Apple iPhone X", "iOS 12", 1125, 2436, 63.0, 1080, 1920}},
      {"pixel-3", {"Google Pixel 3", "Android 9", 1080, 2160, 66.0, 1080, 1920}},
      {"galaxy-s9", {"Samsung Galaxy S9", "Android 8", 1440, 2960, 64.0, 1080, 1920}},
      {"ipad-pro", {"Apple iPad Pro 11", "iPadOS 12", 2388, 1668, 48.0, 1920, 1440}},
  };
  return table;
}

}  // namespace

void validate_profile(const DeviceProfile& profile) {
  require_positive(profile.screen_w_px, "screen_w_px");
  require_positive(profile.screen_h_px, "screen_h_px");
  require_positive(profile.camera_res_w_px, "camera_res_w_px");
  require_positive(profile.camera_res_h_px, "camera_res_h_px");
  if (!std::isfinite(profile.camera_vfov_deg) || profile.camera_vfov_deg <= 10.0 ||
      profile.camera_vfov_deg >= 170.0) {
    throw ValidationError("camera_vfov_deg must be in (10, 170)");
  }
}

const DeviceProfile& profile_preset(std::string_view name) {
  const auto& table = presets();
  auto it = table.find(name);
  if (it == table.end()) throw NotFoundError("unknown device profile '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> profile_preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : presets()) names.push_back(name);
  return names;
}

}  // namespace arstage::viewsim

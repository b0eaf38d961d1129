#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace arstage::viewsim {

/// What the designer's device panel shows about a client, and what the
/// perspective simulation needs to reproduce its camera.
struct DeviceProfile {
  std::string model;
  std::string os;
  int screen_w_px = 0;
  int screen_h_px = 0;
  /// Vertical field of view of the device camera, exclusive range (10, 170).
  double camera_vfov_deg = 60.0;
  int camera_res_w_px = 0;
  int camera_res_h_px = 0;

  [[nodiscard]] double aspect() const {
    return static_cast<double>(screen_w_px) / static_cast<double>(screen_h_px);
  }
  bool operator==(const DeviceProfile&) const = default;
};

/// Throws ValidationError naming the offending field.
void validate_profile(const DeviceProfile& profile);

/// Built-in profiles for common handsets, by short name ("pixel-3", ...).
/// Throws NotFoundError for an unknown name.
const DeviceProfile& profile_preset(std::string_view name);
std::vector<std::string> profile_preset_names();

}  // namespace arstage::viewsim

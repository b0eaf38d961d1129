#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "arstage/error.hpp"
#include "arstage/protocol/messages.hpp"
#include "arstage/tracking/fusion.hpp"
#include "arstage/viewsim/view.hpp"

namespace arstage::server {

/// Server settings. Every field has a working default, so `{}` is a valid
/// config file.
struct ServerConfig {
  /// "host:port" for the HTTP/WebSocket listener.
  std::string bind_addr = "127.0.0.1:8080";
  /// Monitoring feed frames per second.
  double tick_hz = 10.0;
  tracking::FusionConfig fusion;
  viewsim::ViewThresholds thresholds;
  /// Shared secret for /ws; empty disables authentication.
  std::string auth_token;

  /// AR clients silent for longer than this are dropped.
  std::int64_t client_timeout_ms = 10000;
  /// Height of 5-DOF avatars above the frame origin.
  double eye_height_m = 1.6;
  protocol::AvatarMode avatar_mode = protocol::AvatarMode::FiveDof;
  /// Directory served at `/` (the console bundle); empty serves a placeholder.
  std::string static_dir;
  /// Write the project back to its file after every accepted edit.
  bool autosave = false;

  [[nodiscard]] std::int64_t tick_ms() const;
  bool operator==(const ServerConfig&) const = default;
};

/// Malformed or invalid config. `where()` is the offending key path
/// ("fusion.near_m") or "line L, column C" for malformed JSON.
class ConfigError : public Error {
 public:
  ConfigError(std::string where, const std::string& message)
      : Error(where + ": " + message), where_(std::move(where)) {}
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Throws ConfigError for out-of-range values.
void validate_config(const ServerConfig& config);

/// Unknown keys are rejected, naming the key.
ServerConfig config_from_json(std::string_view text);
std::string config_to_json(const ServerConfig& config);
ServerConfig load_config(const std::filesystem::path& path);

}  // namespace arstage::server

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "arstage/content/content_item.hpp"
#include "arstage/error.hpp"
#include "arstage/server/config.hpp"
#include "arstage/viewsim/walkable.hpp"

namespace arstage::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  /// Something failed at run time: bind, connect, an incomplete run.
  kRuntimeFailure = 1,
  /// Bad input: usage, missing or invalid files, or validation findings.
  kValidationFailure = 2,
};

/// Parses `argv` and runs the chosen command. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Asks a running `serve` to shut down. Async-signal-safe.
void request_shutdown();
[[nodiscard]] bool shutdown_requested();
/// Clears a previous request (for running `serve` more than once in-process).
void reset_shutdown();

/// A named input file is missing or unusable.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Loads and validates a project; InputError when the file does not exist.
content::Project read_project(const std::string& path);
/// Empty for an empty path. A path that does not exist skips the
/// walkability check with a notice on `err`.
std::optional<viewsim::WalkableSet> read_walkable(const std::string& path, std::ostream& err);

// ---------------------------------------------------------------------------
// Commands. Each returns an exit code; failures are reported on `err`.

/// Config keys that can be overridden from flags, as JSON key paths.
struct ConfigOverrides {
  std::optional<std::string> bind_addr;
  std::optional<double> tick_hz;
  std::optional<std::string> auth_token;
  std::optional<std::string> static_dir;
  std::optional<long long> client_timeout_ms;
  std::optional<double> eye_height_m;
  std::optional<std::string> avatar_mode;
  std::optional<bool> autosave;
  std::optional<double> fusion_staleness_ms;
  std::optional<double> fusion_transition_ms;
  std::optional<double> fusion_near_m;
  std::optional<double> fusion_hysteresis_m;
  std::optional<double> fusion_slam_drift_m_per_s;
  std::optional<double> fusion_target_accuracy_m;
  std::optional<double> thresholds_rot_deg;
  std::optional<double> thresholds_pos_m;
  std::optional<double> thresholds_too_close_m;
  std::optional<double> thresholds_unreadable_deg;
  std::optional<double> thresholds_overlap_frac;
  std::optional<long long> thresholds_clutter_n;
  std::optional<double> thresholds_attention_radius_m;
};

/// Reads the config file (defaults when empty) and applies the overrides.
/// Throws server::ConfigError.
server::ServerConfig resolve_config(const std::string& path, const ConfigOverrides& overrides);

struct ServeOptions {
  std::string config;
  std::string project;
  std::string walkable;
  unsigned threads = 1;
  ConfigOverrides overrides;
};
int serve(const ServeOptions& options, std::ostream& out, std::ostream& err);

struct SimulateOptions {
  std::vector<std::string> scenarios;
  std::string server;
  std::string token;
  std::string project;
  std::string walkable;
  std::string config;
  std::string log_dir;
  double time_scale = 1.0;
  bool json = false;
};
int simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct ValidateOptions {
  std::string project;
  std::string walkable;
  std::string profile = "pixel-3";
  std::string config;
  std::string severity = "warning";
  double grid_spacing_m = 5.0;
  double margin_m = 10.0;
  int headings = 8;
  bool json = false;
};
int validate(const ValidateOptions& options, std::ostream& out, std::ostream& err);

struct DiagnoseOptions {
  std::string expected;
  std::string actual;
  std::string project;
  std::string profile = "pixel-3";
  std::string config;
  bool json = false;
};
int diagnose(const DiagnoseOptions& options, std::ostream& out, std::ostream& err);

int export_protocol_doc(const std::string& out_path, std::ostream& out, std::ostream& err);

}  // namespace arstage::cli

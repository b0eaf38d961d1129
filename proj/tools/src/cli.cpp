#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <csignal>
#include <fstream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "arstage/content/project_file.hpp"
#include "arstage/net/client.hpp"
#include "arstage/net/server.hpp"
#include "arstage/protocol/schema.hpp"
#include "arstage/sim/scenario.hpp"

namespace arstage::cli {

namespace {

/// "--fusion-near-m" → "ARSTAGE_FUSION_NEAR_M".
std::string env_name(std::string_view flag) {
  std::string name = "ARSTAGE_";
  for (char c : flag.substr(flag.find_first_not_of('-'))) {
    name.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return name;
}

/// Adds an option that can also come from its ARSTAGE_ environment variable.
template <typename T>
CLI::Option* add(CLI::App& app, const std::string& flag, T& target, const std::string& help) {
  return app.add_option(flag, target, help)->envname(env_name(flag));
}

void add_config_flags(CLI::App& app, ConfigOverrides& o) {
  add(app, "--bind-addr", o.bind_addr, "Listener address, host:port");
  add(app, "--tick-hz", o.tick_hz, "Monitoring feed frames per second");
  add(app, "--auth-token", o.auth_token, "Shared secret required on /ws");
  add(app, "--static-dir", o.static_dir, "Console bundle served at /");
  add(app, "--client-timeout-ms", o.client_timeout_ms, "Drop clients silent this long");
  add(app, "--eye-height-m", o.eye_height_m, "Height of 5-DOF avatars");
  add(app, "--avatar-mode", o.avatar_mode, "5dof or 6dof");
  add(app, "--autosave", o.autosave, "Write the project back after each edit (true/false)");
  add(app, "--fusion-staleness-ms", o.fusion_staleness_ms, "Evidence older than this is stale");
  add(app, "--fusion-transition-ms", o.fusion_transition_ms, "Camera crossfade duration");
  add(app, "--fusion-near-m", o.fusion_near_m, "SLAM proximity gate");
  add(app, "--fusion-hysteresis-m", o.fusion_hysteresis_m, "SLAM gate hysteresis");
  add(app, "--fusion-slam-drift-m-per-s", o.fusion_slam_drift_m_per_s, "SLAM accuracy growth");
  add(app, "--fusion-target-accuracy-m", o.fusion_target_accuracy_m, "Fiducial fix accuracy");
  add(app, "--thresholds-rot-deg", o.thresholds_rot_deg, "Rotational mismatch threshold");
  add(app, "--thresholds-pos-m", o.thresholds_pos_m, "Positional mismatch threshold");
  add(app, "--thresholds-too-close-m", o.thresholds_too_close_m, "TooClose distance");
  add(app, "--thresholds-unreadable-deg", o.thresholds_unreadable_deg, "Unreadable angular height");
  add(app, "--thresholds-overlap-frac", o.thresholds_overlap_frac, "Overlap fraction");
  add(app, "--thresholds-clutter-n", o.thresholds_clutter_n, "Clutter item count");
  add(app, "--thresholds-attention-radius-m", o.thresholds_attention_radius_m,
      "Live NotVisible radius");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

volatile std::sig_atomic_t g_shutdown = 0;

}  // namespace

void request_shutdown() { g_shutdown = 1; }

bool shutdown_requested() { return g_shutdown != 0; }
void reset_shutdown() { g_shutdown = 0; }

server::ServerConfig resolve_config(const std::string& path, const ConfigOverrides& o) {
  nlohmann::json root = nlohmann::json::object();
  if (!path.empty()) {
    if (!std::filesystem::exists(path)) throw InputError("config file not found: " + path);
    // Parse through the config reader first so syntax errors carry its positions.
    root = nlohmann::json::parse(server::config_to_json(server::config_from_json(read_file(path))));
  }
  auto set = [&](const char* section, const char* key, const auto& value) {
    if (!value) return;
    if (section) {
      root[section][key] = *value;
    } else {
      root[key] = *value;
    }
  };
  set(nullptr, "bind_addr", o.bind_addr);
  set(nullptr, "tick_hz", o.tick_hz);
  set(nullptr, "auth_token", o.auth_token);
  set(nullptr, "static_dir", o.static_dir);
  set(nullptr, "client_timeout_ms", o.client_timeout_ms);
  set(nullptr, "eye_height_m", o.eye_height_m);
  set(nullptr, "avatar_mode", o.avatar_mode);
  set(nullptr, "autosave", o.autosave);
  set("fusion", "staleness_ms", o.fusion_staleness_ms);
  set("fusion", "transition_ms", o.fusion_transition_ms);
  set("fusion", "near_m", o.fusion_near_m);
  set("fusion", "hysteresis_m", o.fusion_hysteresis_m);
  set("fusion", "slam_drift_m_per_s", o.fusion_slam_drift_m_per_s);
  set("fusion", "target_accuracy_m", o.fusion_target_accuracy_m);
  set("thresholds", "rot_deg", o.thresholds_rot_deg);
  set("thresholds", "pos_m", o.thresholds_pos_m);
  set("thresholds", "too_close_m", o.thresholds_too_close_m);
  set("thresholds", "unreadable_deg", o.thresholds_unreadable_deg);
  set("thresholds", "overlap_frac", o.thresholds_overlap_frac);
  set("thresholds", "clutter_n", o.thresholds_clutter_n);
  set("thresholds", "attention_radius_m", o.thresholds_attention_radius_m);
  return server::config_from_json(root.dump());
}

content::Project read_project(const std::string& path) {
  if (!std::filesystem::exists(path)) throw InputError("project file not found: " + path);
  std::vector<std::string> warnings;
  content::Project project = content::load_project(path, {}, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}: {}", path, w);
  return project;
}

std::optional<viewsim::WalkableSet> read_walkable(const std::string& path, std::ostream& err) {
  if (path.empty()) return std::nullopt;
  auto walkable = viewsim::load_walkable(path);
  if (!walkable) err << "notice: walkable file " << path << " not found; skipping OffGround checks\n";
  return walkable;
}

int export_protocol_doc(const std::string& out_path, std::ostream& out, std::ostream& err) {
  const std::string doc = protocol::schema::reference_markdown();
  if (out_path.empty() || out_path == "-") {
    out << doc;
    return kOk;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file || !(file << doc)) {
    err << "error: cannot write " << out_path << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"arstage: staging server, simulated clients and offline checks for geo-anchored AR"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->envname("ARSTAGE_LOG_LEVEL")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  ServeOptions serve_opts;
  auto* serve_cmd = app.add_subcommand("serve", "Run the staging server until interrupted");
  add(*serve_cmd, "--config", serve_opts.config, "Server config JSON");
  add(*serve_cmd, "--project", serve_opts.project, "Project file")->required();
  add(*serve_cmd, "--walkable", serve_opts.walkable, "Walkable-space polygons");
  add(*serve_cmd, "--threads", serve_opts.threads, "I/O threads")->check(CLI::Range(1u, 64u));
  add_config_flags(*serve_cmd, serve_opts.overrides);

  SimulateOptions sim_opts;
  auto* sim_cmd = app.add_subcommand("simulate", "Run scripted clients and summarize their tracking");
  add(*sim_cmd, "--scenario", sim_opts.scenarios, "Scenario files")->required()->expected(1, -1);
  add(*sim_cmd, "--server", sim_opts.server,
      "Live server (host:port); without it the session runs in process on a simulated clock");
  add(*sim_cmd, "--token", sim_opts.token, "Auth token for the live server");
  add(*sim_cmd, "--project", sim_opts.project, "Project file (in-process runs)");
  add(*sim_cmd, "--walkable", sim_opts.walkable, "Walkable-space polygons (in-process runs)");
  add(*sim_cmd, "--config", sim_opts.config, "Server config JSON (in-process runs)");
  add(*sim_cmd, "--log-dir", sim_opts.log_dir, "Write one JSONL session log per client here");
  add(*sim_cmd, "--time-scale", sim_opts.time_scale, "Scenario seconds per wall second (live runs)")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--json", sim_opts.json, "Print the summary as JSON");

  ValidateOptions val_opts;
  auto* val_cmd = app.add_subcommand("validate", "Check a project's placement from a viewpoint grid");
  add(*val_cmd, "--project", val_opts.project, "Project file")->required();
  add(*val_cmd, "--walkable", val_opts.walkable, "Walkable-space polygons");
  add(*val_cmd, "--profile", val_opts.profile, "Device profile preset");
  add(*val_cmd, "--config", val_opts.config, "Server config JSON (for thresholds)");
  add(*val_cmd, "--severity", val_opts.severity, "Fail on issues at or above: info, warning, error")
      ->check(CLI::IsMember({"info", "warning", "error"}));
  add(*val_cmd, "--grid-spacing-m", val_opts.grid_spacing_m, "Viewpoint grid spacing")
      ->check(CLI::PositiveNumber);
  add(*val_cmd, "--margin-m", val_opts.margin_m, "Grid margin around the content")
      ->check(CLI::NonNegativeNumber);
  add(*val_cmd, "--headings", val_opts.headings, "View directions per viewpoint")
      ->check(CLI::Range(1, 360));
  val_cmd->add_flag("--json", val_opts.json, "Print the report as JSON");

  DiagnoseOptions diag_opts;
  auto* diag_cmd = app.add_subcommand(
      "diagnose", "Compare an expected pose with an actual one and explain the divergence");
  add(*diag_cmd, "--expected", diag_opts.expected,
      "Believed pose: lat,lon,height,heading[,pitch,roll]")->required();
  add(*diag_cmd, "--actual", diag_opts.actual, "True pose, same form")->required();
  add(*diag_cmd, "--project", diag_opts.project, "Also compare what each pose sees");
  add(*diag_cmd, "--profile", diag_opts.profile, "Device profile preset");
  add(*diag_cmd, "--config", diag_opts.config, "Server config JSON (for thresholds)");
  diag_cmd->add_flag("--json", diag_opts.json, "Print the report as JSON");

  std::string doc_out;
  auto* doc_cmd = app.add_subcommand("export-protocol-doc", "Write the wire-protocol reference");
  add(*doc_cmd, "--out", doc_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationFailure;
  }

  // Logs go to stderr so that stdout carries only the command's output.
  static std::once_flag logger_once;
  std::call_once(logger_once, [] {
    spdlog::set_default_logger(std::make_shared<spdlog::logger>(
        "arstage", std::make_shared<spdlog::sinks::stderr_color_sink_mt>()));
  });
  spdlog::set_level(spdlog::level::from_str(log_level));

  int code = kRuntimeFailure;
  try {
    if (*serve_cmd) code = serve(serve_opts, out, err);
    if (*sim_cmd) code = simulate(sim_opts, out, err);
    if (*val_cmd) code = validate(val_opts, out, err);
    if (*diag_cmd) code = diagnose(diag_opts, out, err);
    if (*doc_cmd) code = export_protocol_doc(doc_out, out, err);
  } catch (const net::ConnectError& e) {
    err << "error: " << e.what() << "\n";
    code = kRuntimeFailure;
  } catch (const net::BindError& e) {
    err << "error: " << e.what() << "\n";
    code = kRuntimeFailure;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    code = kValidationFailure;
  } catch (const server::ConfigError& e) {
    err << "error: config: " << e.what() << "\n";
    code = kValidationFailure;
  } catch (const content::ProjectFileError& e) {
    err << "error: project: " << e.what() << "\n";
    code = kValidationFailure;
  } catch (const content::VersionMismatchError& e) {
    err << "error: project: " << e.what() << "\n";
    code = kValidationFailure;
  } catch (const sim::ScenarioError& e) {
    err << "error: scenario: " << e.what() << "\n";
    code = kValidationFailure;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    code = kValidationFailure;
  } catch (const NotFoundError& e) {
    err << "error: " << e.what() << "\n";
    code = kValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = kRuntimeFailure;
  }
  return code;
}

}  // namespace arstage::cli

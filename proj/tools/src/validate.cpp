#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "arstage/geo/geodesy.hpp"
#include "arstage/viewsim/device_profile.hpp"
#include "arstage/viewsim/offline.hpp"
#include "arstage/viewsim/view.hpp"
#include "cli.hpp"

namespace arstage::cli {

namespace {

std::string describe(const viewsim::Issue& issue) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  switch (issue.kind) {
    case viewsim::IssueKind::NotVisible:
      s << "not visible from any viewpoint";
      break;
    case viewsim::IssueKind::TooClose:
      s << "as close as " << issue.value << " m to a viewer";
      break;
    case viewsim::IssueKind::Unreadable:
      s << "at most " << issue.value << " deg tall on screen";
      break;
    case viewsim::IssueKind::Overlap:
      s << "overlaps " << issue.item_b << " (median " << issue.value * 100.0 << "%)";
      break;
    case viewsim::IssueKind::Clutter:
      s << std::setprecision(0) << issue.value << " items visible at once";
      break;
    case viewsim::IssueKind::OffGround:
      s << issue.value << " m outside walkable space";
      break;
  }
  return s.str();
}

nlohmann::json issue_json(const viewsim::Issue& issue) {
  return {{"kind", viewsim::to_string(issue.kind)},
          {"severity", viewsim::to_string(viewsim::severity_of(issue.kind))},
          {"item_a", issue.item_a},
          {"item_b", issue.item_b},
          {"value", issue.value}};
}

/// "lat,lon,height,heading[,pitch,roll]".
struct GeoPose {
  geo::GeoPosition position;
  double heading = 0, pitch = 0, roll = 0;
};

GeoPose parse_geo_pose(const std::string& text, const char* flag) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw ValidationError(std::string(flag) + ": '" + field + "' is not a number");
    }
  }
  if (v.size() != 4 && v.size() != 6) {
    throw ValidationError(std::string(flag) + ": expected lat,lon,height,heading[,pitch,roll]");
  }
  GeoPose p{geo::validated({v[0], v[1], v[2]}), v[3]};
  if (v.size() == 6) {
    p.pitch = v[4];
    p.roll = v[5];
  }
  return p;
}

geo::LocalPose to_local(const geo::FrameAnchor& anchor, const GeoPose& p) {
  return {anchor.to_local(p.position), geo::heading_to_orientation(p.heading, p.pitch, p.roll)};
}

std::vector<std::string> visible_ids(const viewsim::ViewReport& report) {
  std::vector<std::string> ids;
  for (const auto& v : report.visible) ids.push_back(v.item_id);
  return ids;
}

std::string join(const std::vector<std::string>& ids) {
  if (ids.empty()) return "(nothing)";
  std::string s;
  for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
  return s;
}

}  // namespace

int validate(const ValidateOptions& options, std::ostream& out, std::ostream& err) {
  const content::Project project = read_project(options.project);
  const auto walkable = read_walkable(options.walkable, err);
  const viewsim::DeviceProfile& profile = viewsim::profile_preset(options.profile);
  const server::ServerConfig config = resolve_config(options.config, {});
  const viewsim::Scene scene =
      viewsim::build_scene(geo::make_anchor(project.anchor_origin), project.items);
  viewsim::OfflineOptions grid;
  grid.grid_spacing_m = options.grid_spacing_m;
  grid.margin_m = options.margin_m;
  grid.headings = options.headings;
  const viewsim::OfflineReport report = viewsim::validate_offline(
      scene, profile, config.thresholds, walkable ? &*walkable : nullptr, grid);

  const viewsim::Severity fail_at = viewsim::severity_from_string(options.severity);
  std::size_t failing = 0;
  for (const auto& issue : report.issues) {
    if (viewsim::severity_of(issue.kind) >= fail_at) ++failing;
  }

  if (options.json) {
    nlohmann::json j{{"project", project.name},
                     {"profile", options.profile},
                     {"viewpoints", report.viewpoints},
                     {"issues", nlohmann::json::array()},
                     {"failing", failing}};
    for (const auto& issue : report.issues) j["issues"].push_back(issue_json(issue));
    out << j.dump(2) << "\n";
  } else {
    out << "project '" << project.name << "': " << scene.size() << " items, "
        << report.viewpoints << " viewpoints (" << options.profile << ")\n";
    if (report.issues.empty()) out << "no issues\n";
    for (const auto& issue : report.issues) {
      out << "  " << std::left << std::setw(8) << viewsim::to_string(viewsim::severity_of(issue.kind))
          << std::setw(12) << viewsim::to_string(issue.kind) << std::setw(16)
          << (issue.item_a.empty() ? "-" : issue.item_a) << describe(issue) << "\n";
    }
    if (failing > 0) out << failing << " issue(s) at or above '" << options.severity << "'\n";
  }
  return failing == 0 ? kOk : kValidationFailure;
}

int diagnose(const DiagnoseOptions& options, std::ostream& out, std::ostream& err) {
  const GeoPose expected_geo = parse_geo_pose(options.expected, "--expected");
  const GeoPose actual_geo = parse_geo_pose(options.actual, "--actual");
  std::optional<content::Project> project;
  if (!options.project.empty()) project = read_project(options.project);
  const server::ServerConfig config = resolve_config(options.config, {});

  // Compare in the project's frame when there is one, else around the expected position.
  const geo::FrameAnchor anchor =
      geo::make_anchor(project ? project->anchor_origin : expected_geo.position);
  const geo::LocalPose expected = to_local(anchor, expected_geo);
  const geo::LocalPose actual = to_local(anchor, actual_geo);
  const viewsim::DivergenceReport d = viewsim::diagnose(expected, actual, config.thresholds);

  nlohmann::json j{{"rotational_error_deg", d.rotational_error_deg},
                   {"positional_error_m", d.positional_error_m},
                   {"verdict", viewsim::to_string(d.verdict)}};
  std::vector<std::string> seen_expected, seen_actual;
  if (project) {
    const viewsim::DeviceProfile& profile = viewsim::profile_preset(options.profile);
    const viewsim::Scene scene = viewsim::build_scene(anchor, project->items);
    seen_expected = visible_ids(viewsim::render_expected_view(expected, profile, scene, config.thresholds));
    seen_actual = visible_ids(viewsim::render_expected_view(actual, profile, scene, config.thresholds));
    j["expected_view"] = seen_expected;
    j["actual_view"] = seen_actual;
  }

  if (options.json) {
    out << j.dump(2) << "\n";
    return kOk;
  }
  out << std::fixed << std::setprecision(3);
  out << "rotational error  " << d.rotational_error_deg << " deg (threshold "
      << config.thresholds.rot_deg << ")\n";
  out << "positional error  " << d.positional_error_m << " m (threshold " << config.thresholds.pos_m
      << ")\n";
  out << "verdict           " << viewsim::to_string(d.verdict) << "\n";
  switch (d.verdict) {
    case viewsim::Verdict::Nominal:
      break;
    case viewsim::Verdict::RotationalMismatch:
      out << "content will appear rotated about the viewer: suspect compass or gyroscope drift\n";
      break;
    case viewsim::Verdict::PositionalMismatch:
      out << "content will appear displaced: suspect a GPS error\n";
      break;
    case viewsim::Verdict::Both:
      out << "content will appear both displaced and rotated: check position and heading sources\n";
      break;
  }
  if (project) {
    out << "expected view     " << join(seen_expected) << "\n";
    out << "actual view       " << join(seen_actual) << "\n";
  }
  (void)err;
  return kOk;
}

}  // namespace arstage::cli

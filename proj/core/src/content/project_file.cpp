#include "arstage/content/project_file.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "detail/content_json.hpp"
#include "detail/json_fields.hpp"

namespace arstage::content {

namespace {

using nlohmann::ordered_json;
using namespace arstage::detail;

void check_unknown(const json& obj, std::initializer_list<std::string_view> known,
                   const std::string& path, const LoadOptions& options,
                   std::vector<std::string>* warnings) {
  detail::check_unknown(obj, known, path, options.strict, warnings);
}

}  // namespace

std::string project_to_json(const Project& project) {
  ordered_json root;
  root["format_version"] = project.format_version;
  root["name"] = project.name;
  root["origin"] = {{"lat", project.anchor_origin.latitude_deg},
                    {"lon", project.anchor_origin.longitude_deg},
                    {"height", project.anchor_origin.height_m}};
  root["items"] = ordered_json::array();
  for (const auto& item : project.items) root["items"].push_back(item_to_json<ordered_json>(item));
  return root.dump(2) + "\n";
}

Project project_from_json(std::string_view text, const LoadOptions& options,
                          std::vector<std::string>* warnings) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ProjectFileError("line " + std::to_string(line) + ", column " + std::to_string(col),
                           "malformed JSON");
  }
  try {
    require_object(root, "");
    const auto version = as_int(require(root, "format_version", ""), "format_version");
    if (version != Project::kFormatVersion) throw VersionMismatchError(static_cast<int>(version));
    check_unknown(root, {"format_version", "name", "origin", "items"}, "", options, warnings);

    Project p;
    p.format_version = static_cast<int>(version);
    p.name = string_field(root, "name", "");
    const json& origin = require_object(require(root, "origin", ""), "origin");
    check_unknown(origin, {"lat", "lon", "height"}, "origin", options, warnings);
    p.anchor_origin.latitude_deg = number_field(origin, "lat", "origin");
    p.anchor_origin.longitude_deg = number_field(origin, "lon", "origin");
    p.anchor_origin.height_m = number_field_or(origin, "height", "origin", 0.0);
    try {
      p.anchor_origin = geo::validated(p.anchor_origin);
    } catch (const ValidationError& e) {
      throw FieldError("origin", e.what());
    }
    const json& items = as_array(require(root, "items", ""), "items");
    for (std::size_t i = 0; i < items.size(); ++i) {
      p.items.push_back(parse_item(items[i], index("items", i), options.strict, warnings));
    }
    validate_project(p);
    return p;
  } catch (const FieldError& e) {
    throw ProjectFileError(e.path(), e.detail());
  }
}

void save_project(const Project& project, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write project file " + tmp.string());
    out << project_to_json(project);
    if (!out) throw Error("failed writing project file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Project load_project(const std::filesystem::path& path, const LoadOptions& options,
                     std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read project file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return project_from_json(ss.str(), options, warnings);
}

}  // namespace arstage::content

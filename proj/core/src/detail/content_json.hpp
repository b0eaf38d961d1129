#pragma once

// JSON form of a content item, shared by the project file and the wire codec.

#include <string>
#include <vector>

#include "arstage/content/content_item.hpp"
#include "detail/json_fields.hpp"

namespace arstage::detail {

/// Unknown keys throw in strict mode, otherwise become warnings (when wanted).
inline void check_unknown(const json& obj, std::initializer_list<std::string_view> known,
                          const std::string& path, bool strict,
                          std::vector<std::string>* warnings) {
  for (const auto& key : unknown_keys(obj, known)) {
    const std::string where = join(path, key);
    if (strict) throw FieldError(where, "unknown field");
    if (warnings) warnings->push_back(where + ": unknown field ignored");
  }
}

inline content::ContentItem parse_item(const json& j, const std::string& path, bool strict,
                                       std::vector<std::string>* warnings) {
  require_object(j, path);
  check_unknown(j,
                {"id", "kind", "lat", "lon", "height", "orientation", "scale", "asset_ref",
                 "metadata"},
                path, strict, warnings);
  content::ContentItem item;
  item.id = string_field(j, "id", path);
  if (item.id.empty()) throw FieldError(join(path, "id"), "must not be empty");
  try {
    item.kind = content::content_kind_from_string(string_field(j, "kind", path));
  } catch (const ValidationError& e) {
    throw FieldError(join(path, "kind"), e.what());
  }
  item.geo.latitude_deg = number_field(j, "lat", path);
  item.geo.longitude_deg = number_field(j, "lon", path);
  item.geo.height_m = number_field_or(j, "height", path, 0.0);
  if (const json* q = optional(j, "orientation")) {
    item.orientation = as_orientation(*q, join(path, "orientation"));
  }
  if (const json* s = optional(j, "scale")) item.scale = as_vec3(*s, join(path, "scale"));
  for (int k = 0; k < 3; ++k) {
    const double c = k == 0 ? item.scale.x : k == 1 ? item.scale.y : item.scale.z;
    if (c <= 0.0) throw FieldError(index(join(path, "scale"), k), "must be > 0");
  }
  if (const json* a = optional(j, "asset_ref")) item.asset_ref = as_string(*a, join(path, "asset_ref"));
  if (const json* m = optional(j, "metadata")) {
    const std::string mpath = join(path, "metadata");
    require_object(*m, mpath);
    for (auto it = m->begin(); it != m->end(); ++it) {
      item.metadata[it.key()] = as_string(it.value(), join(mpath, it.key()));
    }
  }
  try {
    item.geo = geo::validated(item.geo);
  } catch (const ValidationError& e) {
    throw FieldError(path, e.what());
  }
  return item;
}

template <class Json>
Json item_to_json(const content::ContentItem& item) {
  Json j;
  j["id"] = item.id;
  j["kind"] = content::to_string(item.kind);
  j["lat"] = item.geo.latitude_deg;
  j["lon"] = item.geo.longitude_deg;
  j["height"] = item.geo.height_m;
  j["orientation"] = {item.orientation.w(), item.orientation.x(), item.orientation.y(),
                      item.orientation.z()};
  j["scale"] = {item.scale.x, item.scale.y, item.scale.z};
  j["asset_ref"] = item.asset_ref;
  j["metadata"] = Json::object();
  for (const auto& [k, v] : item.metadata) j["metadata"][k] = v;
  return j;
}

}  // namespace arstage::detail

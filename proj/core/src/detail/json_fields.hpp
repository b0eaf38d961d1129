#pragma once

// Field-path aware accessors shared by the project file, config, scenario and
// wire decoders. Every failure throws FieldError carrying the JSON path of the
// offending value, e.g. "items[3].scale[1]".

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arstage/error.hpp"
#include "arstage/geo/orientation.hpp"
#include "arstage/geo/vec3.hpp"

namespace arstage::detail {

using json = nlohmann::json;

class FieldError : public Error {
 public:
  FieldError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)), detail_(message) {}
  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }

 private:
  std::string path_;
  std::string detail_;
};

inline std::string join(std::string_view base, std::string_view key) {
  if (base.empty()) return std::string(key);
  return std::string(base) + "." + std::string(key);
}

inline std::string index(std::string_view base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw FieldError(path.empty() ? "$" : path, "expected object");
  return j;
}

inline const json& require(const json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw FieldError(join(path, key), "missing required field");
  return *it;
}

inline const json* optional(const json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw FieldError(path, "expected number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FieldError(path, "expected finite number");
  return v;
}

inline std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw FieldError(path, "expected integer");
  return j.get<std::int64_t>();
}

inline std::uint64_t as_uint(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw FieldError(path, "expected non-negative integer");
  }
  return j.get<std::uint64_t>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw FieldError(path, "expected string");
  return j.get<std::string>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw FieldError(path, "expected boolean");
  return j.get<bool>();
}

inline const json& as_array(const json& j, const std::string& path, std::size_t n = 0) {
  if (!j.is_array()) throw FieldError(path, "expected array");
  if (n != 0 && j.size() != n) {
    throw FieldError(path, "expected array of " + std::to_string(n) + " elements");
  }
  return j;
}

inline double number_field(const json& obj, std::string_view key, const std::string& path) {
  return as_number(require(obj, key, path), join(path, key));
}

inline double number_field_or(const json& obj, std::string_view key, const std::string& path,
                              double fallback) {
  const json* v = optional(obj, key);
  return v ? as_number(*v, join(path, key)) : fallback;
}

inline std::string string_field(const json& obj, std::string_view key, const std::string& path) {
  return as_string(require(obj, key, path), join(path, key));
}

inline geo::Vec3 as_vec3(const json& j, const std::string& path) {
  as_array(j, path, 3);
  return {as_number(j[0], index(path, 0)), as_number(j[1], index(path, 1)),
          as_number(j[2], index(path, 2))};
}

inline json to_json(const geo::Vec3& v) { return json::array({v.x, v.y, v.z}); }

/// [w, x, y, z]; must be unit length within 1e-6.
inline geo::Orientation as_orientation(const json& j, const std::string& path) {
  as_array(j, path, 4);
  const double w = as_number(j[0], index(path, 0));
  const double x = as_number(j[1], index(path, 1));
  const double y = as_number(j[2], index(path, 2));
  const double z = as_number(j[3], index(path, 3));
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (std::abs(n - 1.0) > 1e-6) throw FieldError(path, "quaternion must be unit length");
  return geo::Orientation::from_components(w, x, y, z);
}

inline json to_json(const geo::Orientation& q) {
  return json::array({q.w(), q.x(), q.y(), q.z()});
}

/// Names of keys in `obj` that are not in `known`.
inline std::vector<std::string> unknown_keys(const json& obj,
                                             std::initializer_list<std::string_view> known) {
  std::vector<std::string> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (auto k : known) found = found || (k == it.key());
    if (!found) out.push_back(it.key());
  }
  return out;
}

/// 1-based line and column of a byte offset in `text`.
inline std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace arstage::detail

#pragma once

// Validates encoded messages against the documented protocol schema: every
// key must be documented with a matching type, and required fields present.

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arstage/protocol/schema.hpp"

namespace testgen {

namespace schema = arstage::protocol::schema;

class SchemaChecker {
 public:
  /// Returns problems found; empty when the message conforms.
  std::vector<std::string> check(const std::string& encoded) {
    problems_.clear();
    const auto root = nlohmann::json::parse(encoded);
    check_object(root, *schema::find_object("Envelope"), "", "");
    const auto tag = root.at("t").get<std::string>();
    for (const auto& m : schema::message_types()) {
      if (m.tag == tag) check_object(root.at("body"), *schema::find_object(m.body), "body", "");
    }
    return problems_;
  }

  /// "Type.field" for every documented field seen so far.
  const std::set<std::string>& covered() const { return covered_; }

 private:
  void fail(const std::string& path, const std::string& what) { problems_.push_back(path + ": " + what); }

  void check_object(const nlohmann::json& j, const schema::ObjectType& type, const std::string& path,
                    const std::string& mode) {
    if (!j.is_object()) return fail(path, "expected object of type " + std::string(type.name));
    std::string effective_mode = mode;
    if (j.contains("mode") && j["mode"].is_string()) effective_mode = j["mode"].get<std::string>();
    for (const auto& f : type.fields) {
      const bool present = j.contains(std::string(f.name));
      const bool conditional = f.presence.rfind("when mode=", 0) == 0;
      const bool applies = !conditional || f.presence.substr(10) == effective_mode;
      if (present && !applies) fail(path + "." + std::string(f.name), "present for another mode");
      // Optional-by-nature fields inside a conditional set (height) are not required.
      if (!present && f.presence == "required") fail(path + "." + std::string(f.name), "missing");
      if (!present && conditional && applies && f.name != "height") {
        fail(path + "." + std::string(f.name), "missing for mode " + effective_mode);
      }
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      const schema::Field* field = nullptr;
      for (const auto& f : type.fields) {
        if (f.name == it.key()) field = &f;
      }
      const std::string p = path.empty() ? it.key() : path + "." + it.key();
      if (!field) {
        fail(p, "undocumented field");
        continue;
      }
      covered_.insert(std::string(type.name) + "." + it.key());
      if (type.name == "Envelope" && it.key() == "body") continue;  // checked per tag
      check_value(it.value(), field->type, p);
    }
  }

  void check_value(const nlohmann::json& v, std::string_view type, const std::string& path) {
    if (type == "string") {
      if (!v.is_string()) fail(path, "expected string");
    } else if (type == "integer") {
      if (!v.is_number_integer()) fail(path, "expected integer");
    } else if (type == "number") {
      if (!v.is_number()) fail(path, "expected number");
    } else if (type == "boolean") {
      if (!v.is_boolean()) fail(path, "expected boolean");
    } else if (type == "object") {
      if (!v.is_object()) fail(path, "expected object");
    } else if (type.rfind("number[", 0) == 0) {
      const auto n = std::stoul(std::string(type.substr(7)));
      if (!v.is_array() || v.size() != n) return fail(path, "expected " + std::string(type));
      for (const auto& e : v) {
        if (!e.is_number()) fail(path, "expected numbers");
      }
    } else if (type.rfind("array<", 0) == 0) {
      if (!v.is_array()) return fail(path, "expected array");
      const auto inner = type.substr(6, type.size() - 7);
      for (std::size_t i = 0; i < v.size(); ++i) check_value(v[i], inner, path + "[" + std::to_string(i) + "]");
    } else if (type == "map<string,string>") {
      if (!v.is_object()) return fail(path, "expected object");
      for (const auto& e : v) {
        if (!e.is_string()) fail(path, "expected string values");
      }
    } else if (type.rfind("enum<", 0) == 0) {
      const auto* e = schema::find_enum(type.substr(5, type.size() - 6));
      if (!e) return fail(path, "undocumented enum " + std::string(type));
      if (!v.is_string()) return fail(path, "expected enum string");
      const auto s = v.get<std::string>();
      if (std::find(e->values.begin(), e->values.end(), s) == e->values.end()) {
        fail(path, "value '" + s + "' not in " + std::string(type));
      }
    } else if (const auto* obj = schema::find_object(type)) {
      check_object(v, *obj, path, "");
    } else {
      fail(path, "unknown schema type " + std::string(type));
    }
  }

  std::vector<std::string> problems_;
  std::set<std::string> covered_;
};

}  // namespace testgen

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace arstage::protocol::schema {

/// Type grammar used in field descriptions:
///   string | integer | number | boolean | number[N] | array<T> |
///   map<string,string> | enum<Name> | <object type name>
struct Field {
  std::string_view name;
  std::string_view type;
  std::string_view unit;
  /// "required", "optional", or "when mode=<mode>" (required for that mode only).
  std::string_view presence;
  std::string_view description;
};

struct ObjectType {
  std::string_view name;
  std::string_view description;
  std::vector<Field> fields;
};

struct EnumType {
  std::string_view name;
  std::vector<std::string_view> values;
};

struct MessageType {
  std::string_view tag;
  std::string_view sender;
  /// Name of the ObjectType describing "body".
  std::string_view body;
  std::string_view description;
};

const std::vector<ObjectType>& object_types();
const std::vector<EnumType>& enum_types();
const std::vector<MessageType>& message_types();

const ObjectType* find_object(std::string_view name);
const EnumType* find_enum(std::string_view name);

/// The protocol reference document (Markdown) generated from the tables above.
std::string reference_markdown();

}  // namespace arstage::protocol::schema

// Structural validator for the shipped output schemas. Covers the subset
// they use: type, required, properties, items.
#pragma once

#include <string>

#include <json.hpp>

namespace iocttl::testing {

inline bool validate_schema(const nlohmann::json& schema,
                            const nlohmann::json& value, std::string& error,
                            const std::string& path = "$") {
  using nlohmann::json;
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    bool ok = false;
    if (type == "object") ok = value.is_object();
    else if (type == "array") ok = value.is_array();
    else if (type == "string") ok = value.is_string();
    else if (type == "integer") ok = value.is_number_integer();
    else if (type == "number") ok = value.is_number();
    else if (type == "boolean") ok = value.is_boolean();
    if (!ok) {
      error = path + ": expected " + type;
      return false;
    }
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"]) {
      if (!value.contains(key.get<std::string>())) {
        error = path + ": missing required key '" + key.get<std::string>() + "'";
        return false;
      }
    }
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items()) {
      if (!value.contains(key)) continue;
      if (!validate_schema(sub, value[key], error, path + "." + key))
        return false;
    }
  }
  if (schema.contains("items") && value.is_array()) {
    std::size_t i = 0;
    for (const auto& item : value) {
      if (!validate_schema(schema["items"], item, error,
                           path + "[" + std::to_string(i) + "]"))
        return false;
      ++i;
    }
  }
  return true;
}

}  // namespace iocttl::testing

#pragma once

// Internal helpers for reading required fields with precise error messages.

#include <string>
#include <string_view>

#include "json.hpp"
#include "vrts/error.hpp"

namespace vrts::detail {

using json = nlohmann::json;

inline json parse_json_line(std::string_view line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
  }
}

inline const json& require(const json& object, const char* field, std::size_t line_no) {
  if (!object.is_object()) throw FormatError("expected a JSON object", line_no, field);
  const auto it = object.find(field);
  if (it == object.end() || it->is_null()) {
    throw FormatError(std::string("missing field '") + field + "'", line_no, field);
  }
  return *it;
}

template <typename T>
T require_as(const json& object, const char* field, std::size_t line_no) {
  const json& value = require(object, field, line_no);
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("field '") + field + "' has the wrong type", line_no, field);
  }
}

template <typename T>
T optional_as(const json& object, const char* field, T fallback, std::size_t line_no) {
  const auto it = object.find(field);
  if (it == object.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("field '") + field + "' has the wrong type", line_no, field);
  }
}

inline char require_letter(const json& object, const char* field, std::size_t line_no) {
  const auto text = require_as<std::string>(object, field, line_no);
  if (text.size() != 1 || text[0] < 'A' || text[0] > 'Z') {
    throw FormatError(std::string("field '") + field + "' must be one uppercase letter", line_no,
                      field);
  }
  return text[0];
}

}  // namespace vrts::detail

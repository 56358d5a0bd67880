#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "autoseq/error.hpp"

namespace autoseq {

// Scalar column types. Date columns carry ISO-8601 text payloads.
enum class ColumnType { Integer, Number, Text, Date };

inline std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Integer:
      return "integer";
    case ColumnType::Number:
      return "number";
    case ColumnType::Text:
      return "text";
    case ColumnType::Date:
      return "date";
  }
  return "integer";
}

inline ColumnType parse_column_type(std::string_view text) {
  if (text == "integer") return ColumnType::Integer;
  if (text == "number") return ColumnType::Number;
  if (text == "text") return ColumnType::Text;
  if (text == "date") return ColumnType::Date;
  throw SchemaError("unknown column type: " + std::string(text));
}

// One table cell. Integer cells hold int64, number cells hold double,
// text and date cells hold strings.
using Value = std::variant<std::int64_t, double, std::string>;

// Accepts "YYYY-MM-DD" with an optional suffix (e.g. "T09:30:00").
inline bool is_iso_date(std::string_view text) {
  if (text.size() < 10) return false;
  auto digit = [&](std::size_t i) {
    return std::isdigit(static_cast<unsigned char>(text[i])) != 0;
  };
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!digit(i)) return false;
  }
  return text[4] == '-' && text[7] == '-';
}

inline bool conforms(const Value& value, ColumnType type) {
  switch (type) {
    case ColumnType::Integer:
      return std::holds_alternative<std::int64_t>(value);
    case ColumnType::Number:
      return std::holds_alternative<double>(value) ||
             std::holds_alternative<std::int64_t>(value);
    case ColumnType::Text:
      return std::holds_alternative<std::string>(value);
    case ColumnType::Date:
      return std::holds_alternative<std::string>(value) &&
             is_iso_date(std::get<std::string>(value));
  }
  return false;
}

// Canonical storage form: number columns always hold doubles so that a
// cell serializes the same bytes no matter how the caller spelled it.
inline Value normalized(Value value, ColumnType type) {
  if (type == ColumnType::Number && std::holds_alternative<std::int64_t>(value)) {
    return Value{static_cast<double>(std::get<std::int64_t>(value))};
  }
  return value;
}

inline nlohmann::ordered_json value_to_json(const Value& value) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); },
                    value);
}

inline Value value_from_json(const nlohmann::json& j, ColumnType type,
                             const std::string& column) {
  switch (type) {
    case ColumnType::Integer:
      if (j.is_number_integer()) return Value{j.get<std::int64_t>()};
      break;
    case ColumnType::Number:
      if (j.is_number()) return Value{j.get<double>()};
      break;
    case ColumnType::Text:
      if (j.is_string()) return Value{j.get<std::string>()};
      break;
    case ColumnType::Date:
      if (j.is_string() && is_iso_date(j.get<std::string>())) {
        return Value{j.get<std::string>()};
      }
      break;
  }
  throw SchemaError("column '" + column + "' expects " +
                    std::string(to_string(type)) + ", got " + j.dump());
}

}  // namespace autoseq

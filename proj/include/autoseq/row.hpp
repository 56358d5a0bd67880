#pragma once

#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "autoseq/error.hpp"
#include "autoseq/schema.hpp"
#include "autoseq/value.hpp"

namespace autoseq {

// One record: column name -> cell value. Rows are plain values; schema
// conformance is checked where they enter a table.
class Row {
 public:
  Row() = default;
  Row(std::initializer_list<std::pair<const std::string, Value>> cells)
      : cells_(cells) {}

  Row& set(std::string column, Value value) {
    cells_.insert_or_assign(std::move(column), std::move(value));
    return *this;
  }

  bool has(const std::string& column) const { return cells_.contains(column); }

  const Value& at(const std::string& column) const {
    auto it = cells_.find(column);
    if (it == cells_.end()) {
      throw SchemaError("row has no column '" + column + "'");
    }
    return it->second;
  }

  const std::map<std::string, Value>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }

  bool operator==(const Row&) const = default;

 private:
  std::map<std::string, Value> cells_;
};

// Checks the row against the full schema and returns the canonical form
// (number cells coerced to double). Throws SchemaError on any mismatch.
inline Row validated(const Row& row, const TableSchema& schema) {
  Row out;
  for (const Column& col : schema.columns()) {
    if (!row.has(col.name)) {
      throw SchemaError("row is missing column '" + col.name + "' of table '" +
                        schema.name() + "'");
    }
    Value v = normalized(row.at(col.name), col.type);
    if (!conforms(v, col.type)) {
      throw SchemaError("value for column '" + col.name + "' is not " +
                        std::string(to_string(col.type)));
    }
    out.set(col.name, std::move(v));
  }
  if (row.size() != schema.columns().size()) {
    for (const auto& [name, value] : row.cells()) {
      if (schema.find(name) == nullptr) {
        throw SchemaError("row has column '" + name +
                          "' not declared in table '" + schema.name() + "'");
      }
    }
  }
  return out;
}

// Serialized with keys in declared column order, independent of backend.
inline nlohmann::ordered_json row_to_json(const Row& row,
                                          const TableSchema& schema) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const Column& col : schema.columns()) {
    j[col.name] = value_to_json(row.at(col.name));
  }
  return j;
}

inline Row row_from_json(const nlohmann::json& j, const TableSchema& schema) {
  if (!j.is_object()) throw SchemaError("row must be an object: " + j.dump());
  Row row;
  for (const Column& col : schema.columns()) {
    if (!j.contains(col.name)) {
      throw SchemaError("row object is missing column '" + col.name + "'");
    }
    row.set(col.name, value_from_json(j[col.name], col.type, col.name));
  }
  if (j.size() != schema.columns().size()) {
    for (const auto& [key, unused] : j.items()) {
      if (schema.find(key) == nullptr) {
        throw SchemaError("row object has undeclared column '" + key + "'");
      }
    }
  }
  return row;
}

}  // namespace autoseq

#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "autoseq/error.hpp"
#include "autoseq/value.hpp"

namespace autoseq {

struct Column {
  std::string name;
  ColumnType type = ColumnType::Text;

  bool operator==(const Column&) const = default;
};

// Declared shape of one table: named, ordered columns plus the designated
// integer sequence column the allocator reads.
class TableSchema {
 public:
  TableSchema(std::string name, std::vector<Column> columns,
              std::string sequence_column)
      : name_(std::move(name)),
        columns_(std::move(columns)),
        sequence_column_(std::move(sequence_column)) {
    validate();
  }

  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::string& sequence_column() const { return sequence_column_; }

  const Column* find(std::string_view column) const {
    for (const Column& c : columns_) {
      if (c.name == column) return &c;
    }
    return nullptr;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (const Column& c : columns_) {
      cols.push_back({{"name", c.name}, {"type", to_string(c.type)}});
    }
    return {{"name", name_},
            {"columns", std::move(cols)},
            {"sequence_column", sequence_column_}};
  }

  static TableSchema from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("name") || !j.contains("columns") ||
        !j.contains("sequence_column") || !j["columns"].is_array()) {
      throw SchemaError("malformed table schema: " + j.dump());
    }
    std::vector<Column> columns;
    for (const auto& c : j["columns"]) {
      if (!c.is_object() || !c.contains("name") || !c.contains("type") ||
          !c["name"].is_string() || !c["type"].is_string()) {
        throw SchemaError("malformed column entry: " + c.dump());
      }
      columns.push_back(
          {c["name"].get<std::string>(),
           parse_column_type(c["type"].get<std::string>())});
    }
    if (!j["name"].is_string() || !j["sequence_column"].is_string()) {
      throw SchemaError("malformed table schema: " + j.dump());
    }
    return TableSchema(j["name"].get<std::string>(), std::move(columns),
                       j["sequence_column"].get<std::string>());
  }

  bool operator==(const TableSchema&) const = default;

 private:
  void validate() const {
    if (name_.empty()) throw SchemaError("table name must be non-empty");
    if (name_.find('/') != std::string::npos ||
        name_.find('\\') != std::string::npos) {
      throw SchemaError("table name must not contain path separators: " +
                        name_);
    }
    if (columns_.empty()) {
      throw SchemaError("table '" + name_ + "' declares no columns");
    }
    std::unordered_set<std::string_view> seen;
    for (const Column& c : columns_) {
      if (c.name.empty()) throw SchemaError("column name must be non-empty");
      if (!seen.insert(c.name).second) {
        throw SchemaError("duplicate column name: " + c.name);
      }
    }
    const Column* seq = find(sequence_column_);
    if (seq == nullptr) {
      throw SchemaError("sequence column '" + sequence_column_ +
                        "' is not declared in table '" + name_ + "'");
    }
    if (seq->type != ColumnType::Integer) {
      throw SchemaError("sequence column '" + sequence_column_ +
                        "' must be integer-typed");
    }
  }

  std::string name_;
  std::vector<Column> columns_;
  std::string sequence_column_;
};

}  // namespace autoseq

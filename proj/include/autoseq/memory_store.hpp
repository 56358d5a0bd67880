#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "autoseq/error.hpp"
#include "autoseq/table.hpp"

namespace autoseq {

class MemoryTable final : public Table {
 public:
  explicit MemoryTable(TableSchema schema) : schema_(std::move(schema)) {}

  const TableSchema& schema() const override { return schema_; }

  void insert_row(const Row& row) override {
    std::lock_guard lock(mutex_);
    rows_.push_back(validated(row, schema_));
  }

  std::size_t delete_row(const std::string& column, std::int64_t id) override {
    std::lock_guard lock(mutex_);
    require_column(column);
    const Value needle{id};
    auto matches = [&](const Row& r) { return r.at(column) == needle; };
    auto first = std::remove_if(rows_.begin(), rows_.end(), matches);
    std::size_t removed = static_cast<std::size_t>(rows_.end() - first);
    rows_.erase(first, rows_.end());
    return removed;
  }

  std::size_t count_rows() override {
    std::lock_guard lock(mutex_);
    return rows_.size();
  }

  std::optional<Row> last_row() override {
    std::lock_guard lock(mutex_);
    if (rows_.empty()) return std::nullopt;
    return rows_.back();
  }

  std::vector<Row> scan() override {
    std::lock_guard lock(mutex_);
    return rows_;
  }

  TableLock exclusive_lock() override {
    mutex_.lock();
    return TableLock([this] { mutex_.unlock(); });
  }

 private:
  void require_column(const std::string& column) const {
    if (schema_.find(column) == nullptr) {
      throw SchemaError("table '" + schema_.name() + "' has no column '" +
                        column + "'");
    }
  }

  TableSchema schema_;
  std::vector<Row> rows_;
  std::recursive_mutex mutex_;
};

class MemoryStore final : public Store {
 public:
  std::shared_ptr<Table> create_table(const TableSchema& schema) override {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = tables_.try_emplace(
        schema.name(), std::make_shared<MemoryTable>(schema));
    if (!inserted) {
      throw AlreadyExistsError("table already exists: " + schema.name());
    }
    return it->second;
  }

  std::shared_ptr<Table> open_table(const std::string& name) override {
    std::lock_guard lock(mutex_);
    auto it = tables_.find(name);
    if (it == tables_.end()) throw NotFoundError("no such table: " + name);
    return it->second;
  }

  bool has_table(const std::string& name) override {
    std::lock_guard lock(mutex_);
    return tables_.contains(name);
  }

  std::vector<std::string> table_names() override {
    std::lock_guard lock(mutex_);
    std::vector<std::string> names;
    names.reserve(tables_.size());
    for (const auto& [name, unused] : tables_) names.push_back(name);
    return names;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<MemoryTable>> tables_;
};

}  // namespace autoseq

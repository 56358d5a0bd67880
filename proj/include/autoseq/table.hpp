#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autoseq/row.hpp"
#include "autoseq/schema.hpp"

namespace autoseq {

// RAII critical section over one table. While held, no other caller can
// mutate or inspect the table, in this process or any other sharing the
// same storage.
class TableLock {
 public:
  TableLock() = default;
  explicit TableLock(std::function<void()> release)
      : release_(std::move(release)) {}

  TableLock(TableLock&& other) noexcept
      : release_(std::exchange(other.release_, nullptr)) {}

  TableLock& operator=(TableLock&& other) noexcept {
    if (this != &other) {
      reset();
      release_ = std::exchange(other.release_, nullptr);
    }
    return *this;
  }

  TableLock(const TableLock&) = delete;
  TableLock& operator=(const TableLock&) = delete;

  ~TableLock() { reset(); }

  void reset() {
    if (release_) {
      release_();
      release_ = nullptr;
    }
  }

 private:
  std::function<void()> release_;
};

// Backend-neutral table of rows in insertion order. All operations are
// linearized per table; handles may be shared across threads. Locks nest:
// a caller holding exclusive_lock() may invoke any operation.
class Table {
 public:
  virtual ~Table() = default;

  virtual const TableSchema& schema() const = 0;

  // Row must conform to the schema; becomes the last row in insertion
  // order.
  virtual void insert_row(const Row& row) = 0;

  // Removes every row whose integer cell in `column` equals `id`.
  // Returns how many were removed; survivor order is preserved.
  virtual std::size_t delete_row(const std::string& column,
                                 std::int64_t id) = 0;

  virtual std::size_t count_rows() = 0;

  // Most recently inserted surviving row, or nullopt when empty.
  virtual std::optional<Row> last_row() = 0;

  // All surviving rows in insertion order.
  virtual std::vector<Row> scan() = 0;

  virtual TableLock exclusive_lock() = 0;
};

// A named collection of tables on one storage medium.
class Store {
 public:
  virtual ~Store() = default;

  virtual std::shared_ptr<Table> create_table(const TableSchema& schema) = 0;
  virtual std::shared_ptr<Table> open_table(const std::string& name) = 0;
  virtual bool has_table(const std::string& name) = 0;
  virtual std::vector<std::string> table_names() = 0;
};

}  // namespace autoseq

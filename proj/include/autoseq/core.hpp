#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "autoseq/error.hpp"
#include "autoseq/table.hpp"

namespace autoseq {

// What the allocator reads from a table: the surviving row count (trc)
// and the sequence value observed per the active inspection mode
// (max_pi). An empty table reads as (0, 0).
struct TableSnapshot {
  std::int64_t trc = 0;
  std::int64_t max_pi = 0;

  bool operator==(const TableSnapshot&) const = default;

  nlohmann::ordered_json to_json() const {
    return {{"trc", trc}, {"max_pi", max_pi}};
  }
};

// LastRecord reads the sequence cell of the most recently inserted
// surviving row. StrictMax scans for the true column maximum, which
// stays safe when rows were inserted out of order by hand.
enum class InspectionMode { LastRecord, StrictMax };

inline std::string_view to_string(InspectionMode mode) {
  return mode == InspectionMode::LastRecord ? "last-record" : "strict-max";
}

inline InspectionMode parse_inspection_mode(std::string_view text) {
  if (text == "last-record") return InspectionMode::LastRecord;
  if (text == "strict-max") return InspectionMode::StrictMax;
  throw ParseError(1, "unknown inspection mode: " + std::string(text));
}

struct AllocationRequest {
  std::string table_name;
  std::string column_name;
  InspectionMode mode = InspectionMode::LastRecord;
};

struct AllocatedId {
  std::int64_t value = 0;

  bool operator==(const AllocatedId&) const = default;
};

// The comparison rule: the next id is trc+1 when trc >= max_pi, else
// max_pi+1. The tie goes through the count branch; both branches agree
// numerically, so the result is max(trc, max_pi) + 1, and the empty
// snapshot (0, 0) yields 1.
inline AllocatedId next_id(const TableSnapshot& snapshot) {
  if (snapshot.trc < 0 || snapshot.max_pi < 0) {
    throw DataIntegrityError("snapshot fields must be non-negative");
  }
  std::int64_t basis;
  if (snapshot.trc >= snapshot.max_pi) {
    basis = snapshot.trc;
  } else {
    basis = snapshot.max_pi;
  }
  if (basis == std::numeric_limits<std::int64_t>::max()) {
    throw OverflowError("sequence exhausted: next id would leave the 64-bit range");
  }
  return AllocatedId{basis + 1};
}

namespace detail {

inline std::int64_t sequence_cell(const Row& row, const std::string& column) {
  if (!row.has(column)) {
    throw DataIntegrityError("row is missing sequence column '" + column +
                             "'");
  }
  const Value& v = row.at(column);
  if (!std::holds_alternative<std::int64_t>(v)) {
    throw DataIntegrityError("sequence column '" + column +
                             "' holds a non-integer value");
  }
  const std::int64_t id = std::get<std::int64_t>(v);
  if (id < 1) {
    throw DataIntegrityError("sequence column '" + column +
                             "' holds non-positive value " +
                             std::to_string(id));
  }
  return id;
}

inline void require_integer_column(const TableSchema& schema,
                                   const std::string& column) {
  const Column* col = schema.find(column);
  if (col == nullptr) {
    throw SchemaError("table '" + schema.name() + "' has no column '" +
                      column + "'");
  }
  if (col->type != ColumnType::Integer) {
    throw SchemaError("column '" + column + "' of table '" + schema.name() +
                      "' is not integer-typed");
  }
}

}  // namespace detail

// Reads (trc, max_pi) from the table under its critical section.
inline TableSnapshot snapshot_of(Table& table, const std::string& column,
                                 InspectionMode mode) {
  detail::require_integer_column(table.schema(), column);
  TableLock lock = table.exclusive_lock();
  const auto trc = static_cast<std::int64_t>(table.count_rows());
  if (trc == 0) return TableSnapshot{0, 0};
  std::int64_t max_pi = 0;
  if (mode == InspectionMode::LastRecord) {
    max_pi = detail::sequence_cell(*table.last_row(), column);
  } else {
    for (const Row& row : table.scan()) {
      max_pi = std::max(max_pi, detail::sequence_cell(row, column));
    }
  }
  return TableSnapshot{trc, max_pi};
}

namespace detail {

inline std::shared_ptr<Table> open_for(Store& store,
                                       const AllocationRequest& request) {
  if (request.table_name.empty() || request.column_name.empty()) {
    throw SchemaError("allocation request needs a table and a column name");
  }
  return store.open_table(request.table_name);
}

}  // namespace detail

// Computes the next id for the table without inserting anything; the
// caller saves the record separately. Runs under the table's exclusive
// critical section.
inline AllocatedId allocate(Store& store, const AllocationRequest& request) {
  auto table = detail::open_for(store, request);
  TableLock lock = table->exclusive_lock();
  return next_id(snapshot_of(*table, request.column_name, request.mode));
}

// Allocates and inserts the completed row in one critical section, so no
// concurrent caller can observe (or reuse) the id in between. The payload
// carries every column except the sequence column.
inline AllocatedId allocate_and_insert(Store& store,
                                       const AllocationRequest& request,
                                       const Row& payload) {
  auto table = detail::open_for(store, request);
  TableLock lock = table->exclusive_lock();
  if (payload.has(request.column_name)) {
    throw SchemaError("payload must not set the sequence column '" +
                      request.column_name + "'");
  }
  const AllocatedId id =
      next_id(snapshot_of(*table, request.column_name, request.mode));
  Row full = payload;
  full.set(request.column_name, Value{id.value});
  table->insert_row(full);
  return id;
}

}  // namespace autoseq

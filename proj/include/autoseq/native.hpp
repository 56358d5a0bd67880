#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>

#include "autoseq/core.hpp"
#include "autoseq/error.hpp"
#include "autoseq/table.hpp"

namespace autoseq {

// Reference model of engine-native autoincrement: a high-water mark that
// only ever rises. Deletions never give an id back, which is exactly
// where this model and the table-derived allocator can disagree.
class NativeCounter {
 public:
  NativeCounter() = default;

  explicit NativeCounter(std::int64_t high_water) : high_water_(high_water) {
    if (high_water < 0) {
      throw DataIntegrityError("high-water mark must be non-negative");
    }
  }

  std::int64_t high_water() const { return high_water_; }

  AllocatedId next() {
    if (high_water_ == std::numeric_limits<std::int64_t>::max()) {
      throw OverflowError(
          "sequence exhausted: next id would leave the 64-bit range");
    }
    return AllocatedId{++high_water_};
  }

  // Models engines that bump their sequence past explicitly inserted ids.
  void raise_to(std::int64_t id) { high_water_ = std::max(high_water_, id); }

  // Seeds the mark from existing data: the column maximum, 0 when empty.
  static NativeCounter adopt_table(Table& table, const std::string& column) {
    detail::require_integer_column(table.schema(), column);
    TableLock lock = table.exclusive_lock();
    std::int64_t high = 0;
    for (const Row& row : table.scan()) {
      const Value& v = row.at(column);
      if (!std::holds_alternative<std::int64_t>(v)) {
        throw DataIntegrityError("sequence column '" + column +
                                 "' holds a non-integer value");
      }
      high = std::max(high, std::get<std::int64_t>(v));
    }
    return NativeCounter(high);
  }

 private:
  std::int64_t high_water_ = 0;
};

}  // namespace autoseq

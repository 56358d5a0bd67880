#pragma once

#include <stdlib.h>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoseq/autoseq.hpp"

namespace autoseq::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "autoseq_XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw std::runtime_error("mkdtemp failed");
    }
    path_ = tmpl;
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

enum class Backend { Memory, File };

inline const char* backend_name(Backend b) {
  return b == Backend::Memory ? "memory" : "file";
}

// Owns one store of the requested backend plus its scratch directory.
class StoreFixture {
 public:
  explicit StoreFixture(Backend backend) {
    if (backend == Backend::File) {
      dir_.emplace();
      store_ = std::make_unique<FileStore>(dir_->path());
    } else {
      store_ = std::make_unique<MemoryStore>();
    }
  }

  Store& store() { return *store_; }

 private:
  std::optional<TempDir> dir_;
  std::unique_ptr<Store> store_;
};

// The fee-receipt transaction table used throughout the tests.
inline TableSchema fees_schema() {
  return TableSchema("Tab_T_Fees",
                     {{"Roll_Number", ColumnType::Number},
                      {"Receipt_Date", ColumnType::Date},
                      {"Fee", ColumnType::Number},
                      {"Student_Full_Name", ColumnType::Text},
                      {"Fee_Purpose", ColumnType::Text},
                      {"Remark", ColumnType::Text},
                      {"Rcpt_SL", ColumnType::Integer},
                      {"Branch", ColumnType::Text},
                      {"Session", ColumnType::Text},
                      {"Duplicate", ColumnType::Text},
                      {"Fee_Purpose_Type", ColumnType::Number}},
                     "Rcpt_SL");
}

// Everything except the sequence column, ready for allocate_and_insert.
inline Row fee_payload() {
  return Row{{"Roll_Number", Value{1021.0}},
             {"Receipt_Date", Value{std::string("2015-04-01")}},
             {"Fee", Value{1500.0}},
             {"Student_Full_Name", Value{std::string("A Student")}},
             {"Fee_Purpose", Value{std::string("Tuition")}},
             {"Remark", Value{std::string("")}},
             {"Branch", Value{std::string("CSE")}},
             {"Session", Value{std::string("2015-16")}},
             {"Duplicate", Value{std::string("N")}},
             {"Fee_Purpose_Type", Value{1.0}}};
}

inline Row fee_row(std::int64_t receipt) {
  Row row = fee_payload();
  row.set("Rcpt_SL", Value{receipt});
  return row;
}

// Five receipts then receipt 4 deleted: survivors carry 1, 2, 3, 5.
inline std::shared_ptr<Table> receipts_with_gap(Store& store) {
  auto table = store.create_table(fees_schema());
  for (std::int64_t id : {1, 2, 3, 4, 5}) table->insert_row(fee_row(id));
  table->delete_row("Rcpt_SL", 4);
  return table;
}

inline std::vector<std::int64_t> sequence_values(Table& table,
                                                 const std::string& column) {
  std::vector<std::int64_t> values;
  for (const Row& row : table.scan()) {
    values.push_back(std::get<std::int64_t>(row.at(column)));
  }
  return values;
}

}  // namespace autoseq::testing

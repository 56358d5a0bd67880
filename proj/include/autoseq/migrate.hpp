#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "autoseq/error.hpp"
#include "autoseq/row.hpp"
#include "autoseq/schema.hpp"
#include "autoseq/table.hpp"

namespace autoseq {

inline constexpr int kDumpFormatVersion = 1;

// Portable, backend-neutral image of one table: the schema plus every
// surviving row in insertion order. Carries no allocator state; the
// allocator derives everything from the data, which is what makes the
// move between backends safe.
struct TableDump {
  TableSchema schema;
  std::vector<Row> rows;
  int format_version = kDumpFormatVersion;
};

inline TableDump export_table(Table& table) {
  TableLock lock = table.exclusive_lock();
  return TableDump{table.schema(), table.scan(), kDumpFormatVersion};
}

// Creates the table in the destination store and replays the dump's rows
// in order. The destination must not already hold the name; on collision
// nothing is written.
inline std::shared_ptr<Table> import_table(Store& store,
                                           const TableDump& dump) {
  if (dump.format_version != kDumpFormatVersion) {
    throw VersionError("unsupported dump format version " +
                       std::to_string(dump.format_version) + " (expected " +
                       std::to_string(kDumpFormatVersion) + ")");
  }
  auto table = store.create_table(dump.schema);
  for (const Row& row : dump.rows) {
    table->insert_row(row);
  }
  return table;
}

// Dump file layout (.tdump): line 1 is
// {"format_version":1,"schema":{...}}, then one row object per line in
// insertion order. No tombstones, dumps are compacted views.
inline void write_dump(const TableDump& dump, std::ostream& out) {
  nlohmann::ordered_json header;
  header["format_version"] = dump.format_version;
  header["schema"] = dump.schema.to_json();
  out << header.dump() << "\n";
  for (const Row& row : dump.rows) {
    out << row_to_json(row, dump.schema).dump() << "\n";
  }
  if (!out) throw IoError("failed to write table dump");
}

inline TableDump read_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(1, "dump is empty; expected a header line");
  }
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      !header.contains("format_version") || !header.contains("schema") ||
      !header["format_version"].is_number_integer()) {
    throw ParseError(1, "malformed dump header: " + line);
  }
  const int version = header["format_version"].get<int>();
  if (version != kDumpFormatVersion) {
    throw VersionError("unsupported dump format version " +
                       std::to_string(version) + " (expected " +
                       std::to_string(kDumpFormatVersion) + ")");
  }
  TableDump dump{TableSchema::from_json(header["schema"]), {}, version};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ParseError(line_no, "unparsable dump row: " + line);
    }
    dump.rows.push_back(row_from_json(j, dump.schema));
  }
  return dump;
}

inline void write_dump_file(const TableDump& dump,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  write_dump(dump, out);
}

inline TableDump read_dump_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return read_dump(in);
}

}  // namespace autoseq

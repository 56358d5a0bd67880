// Command-line surface over a file-backed store directory: table setup,
// id allocation, inspection, script replay, auditing, and migration.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "autoseq/autoseq.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDivergence = 1;
constexpr int kError = 2;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw autoseq::IoError("cannot open for reading: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) {
    throw autoseq::ParseError(1, "invalid JSON in " + path.string());
  }
  return j;
}

// Payload rows carry every column except the sequence column.
autoseq::Row payload_from_json(const nlohmann::json& j,
                               const autoseq::TableSchema& schema,
                               const std::string& sequence_column) {
  if (!j.is_object()) {
    throw autoseq::SchemaError("payload must be a JSON object");
  }
  autoseq::Row row;
  for (const autoseq::Column& col : schema.columns()) {
    if (col.name == sequence_column) continue;
    if (!j.contains(col.name)) {
      throw autoseq::SchemaError("payload is missing column '" + col.name +
                                 "'");
    }
    row.set(col.name, autoseq::value_from_json(j[col.name], col.type,
                                               col.name));
  }
  for (const auto& [key, unused] : j.items()) {
    if (key == sequence_column) {
      throw autoseq::SchemaError("payload must not set the sequence column '" +
                                 sequence_column + "'");
    }
    if (schema.find(key) == nullptr) {
      throw autoseq::SchemaError("payload has undeclared column '" + key +
                                 "'");
    }
  }
  return row;
}

std::string resolve_column(const autoseq::TableSchema& schema,
                           const std::string& flag_value) {
  return flag_value.empty() ? schema.sequence_column() : flag_value;
}

struct Options {
  std::string store;
  std::string table;
  std::string column;
  std::string mode = "last-record";
  std::string schema_file;
  std::string payload_file;
  std::string script_file;
  std::string replay_table = "replay";
  std::string out_file;
  std::string in_file;
};

int cmd_init(const Options& opt) {
  std::filesystem::create_directories(opt.store);
  autoseq::FileStore store{opt.store};
  store.create_table(
      autoseq::TableSchema::from_json(parse_json_file(opt.schema_file)));
  return kOk;
}

int cmd_alloc(const Options& opt) {
  autoseq::FileStore store{opt.store};
  auto table = store.open_table(opt.table);
  const autoseq::AllocationRequest request{
      opt.table, resolve_column(table->schema(), opt.column),
      autoseq::parse_inspection_mode(opt.mode)};
  autoseq::AllocatedId id{};
  if (opt.payload_file.empty()) {
    id = autoseq::allocate(store, request);
  } else {
    const autoseq::Row payload = payload_from_json(
        parse_json_file(opt.payload_file), table->schema(),
        request.column_name);
    id = autoseq::allocate_and_insert(store, request, payload);
  }
  std::cout << id.value << "\n";
  return kOk;
}

int cmd_inspect(const Options& opt) {
  autoseq::FileStore store{opt.store};
  auto table = store.open_table(opt.table);
  const autoseq::TableSnapshot snapshot = autoseq::snapshot_of(
      *table, resolve_column(table->schema(), opt.column),
      autoseq::parse_inspection_mode(opt.mode));
  std::cout << snapshot.to_json().dump() << "\n";
  return kOk;
}

int cmd_replay(const Options& opt) {
  autoseq::FileStore store{opt.store};
  const autoseq::WorkloadScript script =
      autoseq::parse_workload(read_file(opt.script_file));
  const auto trace =
      autoseq::run_workload(script, autoseq::parse_inspection_mode(opt.mode),
                            store, opt.replay_table);
  std::cout << autoseq::trace_to_text(trace);
  const autoseq::DivergenceSummary summary = autoseq::diff_traces(trace);
  if (summary.total > 0) {
    std::cerr << summary.to_json().dump() << "\n";
    return kDivergence;
  }
  return kOk;
}

int cmd_audit(const Options& opt) {
  autoseq::FileStore store{opt.store};
  auto table = store.open_table(opt.table);
  const autoseq::AuditReport report = autoseq::audit_table(
      *table, resolve_column(table->schema(), opt.column));
  std::cout << report.to_json().dump() << "\n";
  return kOk;
}

int cmd_export(const Options& opt) {
  autoseq::FileStore store{opt.store};
  const autoseq::TableDump dump =
      autoseq::export_table(*store.open_table(opt.table));
  if (opt.out_file.empty()) {
    autoseq::write_dump(dump, std::cout);
  } else {
    autoseq::write_dump_file(dump, opt.out_file);
  }
  return kOk;
}

int cmd_import(const Options& opt) {
  autoseq::FileStore store{opt.store};
  const autoseq::TableDump dump = autoseq::read_dump_file(opt.in_file);
  auto table = autoseq::import_table(store, dump);
  nlohmann::ordered_json result;
  result["imported"] = dump.schema.name();
  result["rows"] = table->count_rows();
  std::cout << result.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storage-independent auto-sequence allocator"};
  app.require_subcommand(1);

  Options opt;
  const auto mode_check =
      CLI::IsMember({"last-record", "strict-max"}, CLI::ignore_case);

  auto add_store = [&](CLI::App* cmd) {
    cmd->add_option("--store", opt.store, "Store directory")->required();
  };

  CLI::App* init = app.add_subcommand("init", "Create a table from a schema file");
  add_store(init);
  init->add_option("--schema", opt.schema_file, "Schema JSON file")
      ->required();

  CLI::App* alloc = app.add_subcommand("alloc", "Allocate the next id");
  add_store(alloc);
  alloc->add_option("--table", opt.table)->required();
  alloc->add_option("--column", opt.column,
                    "Sequence column (default: the schema's)");
  alloc->add_option("--mode", opt.mode)->transform(mode_check);
  alloc->add_option("--payload", opt.payload_file,
                    "Row JSON file; when given, the row is inserted with the "
                    "allocated id");

  CLI::App* inspect = app.add_subcommand("inspect", "Print the (trc, max_pi) snapshot");
  add_store(inspect);
  inspect->add_option("--table", opt.table)->required();
  inspect->add_option("--column", opt.column);
  inspect->add_option("--mode", opt.mode)->transform(mode_check);

  CLI::App* replay = app.add_subcommand(
      "replay", "Replay a script against both allocators and print the trace");
  add_store(replay);
  replay->add_option("--script", opt.script_file)->required();
  replay->add_option("--mode", opt.mode)->transform(mode_check);
  replay->add_option("--table", opt.replay_table,
                     "Fresh table name for the run (default: replay)");

  CLI::App* audit = app.add_subcommand("audit", "Report sequence-column integrity findings");
  add_store(audit);
  audit->add_option("--table", opt.table)->required();
  audit->add_option("--column", opt.column);

  CLI::App* exp = app.add_subcommand("export", "Write a portable table dump");
  add_store(exp);
  exp->add_option("--table", opt.table)->required();
  exp->add_option("--out", opt.out_file, "Dump file (default: stdout)");

  CLI::App* imp = app.add_subcommand("import", "Load a table dump into the store");
  add_store(imp);
  imp->add_option("--in", opt.in_file, "Dump file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (init->parsed()) return cmd_init(opt);
    if (alloc->parsed()) return cmd_alloc(opt);
    if (inspect->parsed()) return cmd_inspect(opt);
    if (replay->parsed()) return cmd_replay(opt);
    if (audit->parsed()) return cmd_audit(opt);
    if (exp->parsed()) return cmd_export(opt);
    if (imp->parsed()) return cmd_import(opt);
  } catch (const autoseq::Error& e) {
    std::cerr << "autoseq: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "autoseq: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

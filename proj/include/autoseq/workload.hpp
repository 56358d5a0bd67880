#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "autoseq/core.hpp"
#include "autoseq/error.hpp"
#include "autoseq/native.hpp"
#include "autoseq/table.hpp"

namespace autoseq {

// One replay command. The script grammar is line oriented:
//   alloc | insert <int> | delete <int> | snapshot
// with '#' starting a comment and blank lines ignored.
struct Command {
  enum class Kind { Alloc, Insert, Delete, Snapshot };

  Kind kind = Kind::Alloc;
  std::int64_t id = 0;  // Insert/Delete operand

  static Command alloc() { return {Kind::Alloc, 0}; }
  static Command insert(std::int64_t id) { return {Kind::Insert, id}; }
  static Command remove(std::int64_t id) { return {Kind::Delete, id}; }
  static Command snapshot() { return {Kind::Snapshot, 0}; }

  std::string text() const {
    switch (kind) {
      case Kind::Alloc:
        return "alloc";
      case Kind::Insert:
        return "insert " + std::to_string(id);
      case Kind::Delete:
        return "delete " + std::to_string(id);
      case Kind::Snapshot:
        return "snapshot";
    }
    return "alloc";
  }

  bool operator==(const Command&) const = default;
};

using WorkloadScript = std::vector<Command>;

namespace detail {

inline std::string_view trimmed(std::string_view s) {
  const auto* ws = " \t\r";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

inline std::int64_t parse_script_id(std::string_view token, std::size_t line) {
  std::int64_t value = 0;
  if (token.empty()) throw ParseError(line, "expected an id argument");
  for (const char c : token) {
    if (c < '0' || c > '9') {
      throw ParseError(line, "id must be a positive integer, got '" +
                                 std::string(token) + "'");
    }
    if (value > (std::numeric_limits<std::int64_t>::max() - (c - '0')) / 10) {
      throw ParseError(line, "id out of range: " + std::string(token));
    }
    value = value * 10 + (c - '0');
  }
  if (value < 1) {
    throw ParseError(line, "id must be >= 1, got " + std::string(token));
  }
  return value;
}

}  // namespace detail

inline WorkloadScript parse_workload(std::string_view text) {
  WorkloadScript script;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = nl == std::string_view::npos
                                ? text.substr(pos)
                                : text.substr(pos, nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trimmed(line);
    if (line.empty()) continue;

    const std::size_t space = line.find_first_of(" \t");
    const std::string_view word = line.substr(0, space);
    const std::string_view rest =
        space == std::string_view::npos
            ? std::string_view{}
            : detail::trimmed(line.substr(space + 1));

    if (word == "alloc" || word == "snapshot") {
      if (!rest.empty()) {
        throw ParseError(line_no,
                         std::string(word) + " takes no argument, got '" +
                             std::string(rest) + "'");
      }
      script.push_back(word == "alloc" ? Command::alloc()
                                       : Command::snapshot());
    } else if (word == "insert" || word == "delete") {
      if (rest.find_first_of(" \t") != std::string_view::npos) {
        throw ParseError(line_no, std::string(word) + " takes one argument");
      }
      const std::int64_t id = detail::parse_script_id(rest, line_no);
      script.push_back(word == "insert" ? Command::insert(id)
                                        : Command::remove(id));
    } else {
      throw ParseError(line_no, "unknown command '" + std::string(word) + "'");
    }
  }
  return script;
}

// One replayed step: the command plus what each side observed. Alloc
// steps carry both allocators' ids; snapshot steps carry the inspection
// result; divergent is true only when both ids are present and differ.
struct TraceEvent {
  std::size_t step = 0;
  Command command;
  std::optional<std::int64_t> seq_core_id;
  std::optional<std::int64_t> native_id;
  std::optional<TableSnapshot> snapshot;
  bool divergent = false;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["step"] = step;
    j["command"] = command.text();
    if (seq_core_id) j["seq_core"] = *seq_core_id;
    if (native_id) j["native"] = *native_id;
    if (snapshot) j["snapshot"] = snapshot->to_json();
    j["divergent"] = divergent;
    return j;
  }
};

inline std::string trace_to_text(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const TraceEvent& event : trace) {
    out += event.to_json().dump() + "\n";
  }
  return out;
}

// Schema used for replay tables: a single integer sequence column.
inline TableSchema replay_schema(const std::string& table_name) {
  return TableSchema(table_name, {{"id", ColumnType::Integer}}, "id");
}

namespace detail {

template <typename F>
auto at_step(std::size_t step, F&& body) {
  const auto tag = [step](const Error& e) {
    return "step " + std::to_string(step) + ": " + e.what();
  };
  try {
    return body();
  } catch (const SchemaError& e) {
    throw SchemaError(tag(e));
  } catch (const DataIntegrityError& e) {
    throw DataIntegrityError(tag(e));
  } catch (const NotFoundError& e) {
    throw NotFoundError(tag(e));
  } catch (const AlreadyExistsError& e) {
    throw AlreadyExistsError(tag(e));
  } catch (const OverflowError& e) {
    throw OverflowError(tag(e));
  } catch (const VersionError& e) {
    throw VersionError(tag(e));
  } catch (const IoError& e) {
    throw IoError(tag(e));
  }
}

}  // namespace detail

// Replays the script on a fresh table, running the table-derived
// allocator and the native model side by side. Raw inserts go to the
// table and raise the native mark to at least the inserted id; deletes
// touch only the table.
inline std::vector<TraceEvent> run_workload(const WorkloadScript& script,
                                            InspectionMode mode, Store& store,
                                            const std::string& table_name) {
  auto table = store.create_table(replay_schema(table_name));
  NativeCounter native;
  const AllocationRequest request{table_name, "id", mode};

  std::vector<TraceEvent> trace;
  trace.reserve(script.size());
  for (std::size_t i = 0; i < script.size(); ++i) {
    const Command& command = script[i];
    TraceEvent event;
    event.step = i;
    event.command = command;
    detail::at_step(i, [&] {
      switch (command.kind) {
        case Command::Kind::Alloc:
          event.seq_core_id = allocate_and_insert(store, request, Row{}).value;
          event.native_id = native.next().value;
          event.divergent = *event.seq_core_id != *event.native_id;
          break;
        case Command::Kind::Insert:
          table->insert_row(Row{{"id", Value{command.id}}});
          native.raise_to(command.id);
          break;
        case Command::Kind::Delete:
          table->delete_row("id", command.id);
          break;
        case Command::Kind::Snapshot:
          event.snapshot = snapshot_of(*table, "id", mode);
          break;
      }
    });
    trace.push_back(std::move(event));
  }
  return trace;
}

inline std::vector<TraceEvent> run_workload(const WorkloadScript& script,
                                            InspectionMode mode,
                                            Store& store) {
  return run_workload(script, mode, store, "replay");
}

enum class DivergenceCause { MaxRowDeleted, ManualInsert, Unknown };

inline std::string_view to_string(DivergenceCause cause) {
  switch (cause) {
    case DivergenceCause::MaxRowDeleted:
      return "max-row-deleted";
    case DivergenceCause::ManualInsert:
      return "manual-insert";
    case DivergenceCause::Unknown:
      return "unknown";
  }
  return "unknown";
}

struct Divergence {
  std::size_t step = 0;
  DivergenceCause cause = DivergenceCause::Unknown;

  bool operator==(const Divergence&) const = default;
};

struct DivergenceSummary {
  std::size_t total = 0;
  std::optional<std::size_t> first_step;
  std::vector<Divergence> divergences;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const Divergence& d : divergences) {
      list.push_back(
          {{"step", d.step}, {"cause", std::string(to_string(d.cause))}});
    }
    nlohmann::ordered_json j;
    j["divergences"] = total;
    if (first_step) j["first_step"] = *first_step;
    j["events"] = std::move(list);
    return j;
  }
};

// Walks the trace, classifying each divergent allocation by the earliest
// precondition seen in its prefix: a delete that removed the row holding
// the then-current maximum id, or a raw insert that perturbed the table
// by hand. Both causes are re-checkable from the trace alone.
inline DivergenceSummary diff_traces(const std::vector<TraceEvent>& trace) {
  DivergenceSummary summary;
  std::multiset<std::int64_t> present;
  bool saw_max_delete = false;
  bool saw_manual_insert = false;

  for (const TraceEvent& event : trace) {
    if (event.divergent) {
      summary.total += 1;
      if (!summary.first_step) summary.first_step = event.step;
      DivergenceCause cause = DivergenceCause::Unknown;
      if (saw_max_delete) {
        cause = DivergenceCause::MaxRowDeleted;
      } else if (saw_manual_insert) {
        cause = DivergenceCause::ManualInsert;
      }
      summary.divergences.push_back({event.step, cause});
    }
    switch (event.command.kind) {
      case Command::Kind::Alloc:
        if (event.seq_core_id) present.insert(*event.seq_core_id);
        break;
      case Command::Kind::Insert:
        saw_manual_insert = true;
        present.insert(event.command.id);
        break;
      case Command::Kind::Delete: {
        const std::int64_t id = event.command.id;
        if (present.contains(id)) {
          if (!present.empty() && id == *present.rbegin()) {
            saw_max_delete = true;
          }
          present.erase(id);
        }
        break;
      }
      case Command::Kind::Snapshot:
        break;
    }
  }
  return summary;
}

// Data-integrity findings for one sequence column: duplicate ids,
// non-positive ids, holes in 1..max, and whether the two inspection
// modes would disagree on this table.
struct AuditReport {
  std::vector<std::int64_t> duplicates;
  std::vector<std::int64_t> non_positive;
  std::vector<std::int64_t> gaps;
  bool modes_disagree = false;

  bool empty() const {
    return duplicates.empty() && non_positive.empty() && gaps.empty() &&
           !modes_disagree;
  }

  nlohmann::ordered_json to_json() const {
    return {{"duplicates", duplicates},
            {"non_positive", non_positive},
            {"gaps", gaps},
            {"modes_disagree", modes_disagree}};
  }
};

inline AuditReport audit_table(Table& table, const std::string& column) {
  detail::require_integer_column(table.schema(), column);
  TableLock lock = table.exclusive_lock();

  std::vector<std::int64_t> values;
  for (const Row& row : table.scan()) {
    const Value& v = row.at(column);
    if (!std::holds_alternative<std::int64_t>(v)) {
      throw DataIntegrityError("sequence column '" + column +
                               "' holds a non-integer value");
    }
    values.push_back(std::get<std::int64_t>(v));
  }

  AuditReport report;
  std::map<std::int64_t, std::size_t> occurrences;
  for (const std::int64_t v : values) ++occurrences[v];

  std::int64_t max_id = 0;
  for (const auto& [id, count] : occurrences) {
    if (count > 1) report.duplicates.push_back(id);
    if (id < 1) report.non_positive.push_back(id);
    max_id = std::max(max_id, id);
  }
  for (std::int64_t id = 1; id <= max_id; ++id) {
    if (!occurrences.contains(id)) report.gaps.push_back(id);
  }
  if (!values.empty()) {
    const std::int64_t last = values.back();
    const std::int64_t top = *std::max_element(values.begin(), values.end());
    report.modes_disagree = last != top;
  }
  return report;
}

}  // namespace autoseq

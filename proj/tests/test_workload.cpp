#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "autoseq/autoseq.hpp"
#include "support/fixtures.hpp"

using namespace autoseq;
using namespace autoseq::testing;

namespace {

std::vector<std::int64_t> alloc_ids(const std::vector<TraceEvent>& trace,
                                    bool native) {
  std::vector<std::int64_t> ids;
  for (const TraceEvent& event : trace) {
    if (event.command.kind != Command::Kind::Alloc) continue;
    ids.push_back(native ? *event.native_id : *event.seq_core_id);
  }
  return ids;
}

}  // namespace

TEST_CASE("scripts parse into command lists") {
  const WorkloadScript script = parse_workload("alloc\nalloc\ndelete 4");
  REQUIRE(script.size() == 3);
  CHECK(script[0] == Command::alloc());
  CHECK(script[1] == Command::alloc());
  CHECK(script[2] == Command::remove(4));

  CHECK(parse_workload("").empty());
  CHECK(parse_workload("   \n\t\n").empty());
  CHECK(parse_workload("# just a comment\n  # another").empty());

  const WorkloadScript mixed = parse_workload(
      "# receipts\n"
      "alloc   # first\n"
      "\n"
      "insert 10\n"
      "snapshot\n");
  CHECK(mixed == WorkloadScript{Command::alloc(), Command::insert(10),
                                Command::snapshot()});

  CHECK(parse_workload("insert 007") == WorkloadScript{Command::insert(7)});
  CHECK(parse_workload("alloc") == parse_workload("alloc\n"));
}

TEST_CASE("parse errors carry the offending line number") {
  const auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_workload(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    FAIL("expected a parse error");
    return 0;
  };

  CHECK(line_of("alloc 5") == 1);
  CHECK(line_of("# ok\n\ninsert 3\ndelete x") == 4);
  CHECK(line_of("alloc\nfrobnicate") == 2);

  CHECK_THROWS_WITH(parse_workload("alloc 5"),
                    Catch::Matchers::ContainsSubstring("takes no argument"));
  CHECK_THROWS_WITH(parse_workload("snapshot now"),
                    Catch::Matchers::ContainsSubstring("takes no argument"));
  CHECK_THROWS_WITH(parse_workload("insert"),
                    Catch::Matchers::ContainsSubstring("expected an id"));
  CHECK_THROWS_WITH(parse_workload("insert 1 2"),
                    Catch::Matchers::ContainsSubstring("takes one argument"));
  CHECK_THROWS_WITH(parse_workload("delete 0"),
                    Catch::Matchers::ContainsSubstring("id must be >= 1"));
  CHECK_THROWS_WITH(
      parse_workload("delete -3"),
      Catch::Matchers::ContainsSubstring("id must be a positive integer"));
  CHECK_THROWS_WITH(parse_workload("insert 99999999999999999999"),
                    Catch::Matchers::ContainsSubstring("id out of range"));
}

TEST_CASE("command text round-trips through the parser") {
  const WorkloadScript script{Command::alloc(), Command::insert(12),
                              Command::remove(3), Command::snapshot()};
  std::string text;
  for (const Command& c : script) text += c.text() + "\n";
  CHECK(parse_workload(text) == script);
}

TEST_CASE("an append-and-delete-below-max run stays aligned") {
  const Backend backend = GENERATE(Backend::Memory, Backend::File);
  INFO("backend: " << backend_name(backend));
  StoreFixture fixture(backend);

  const WorkloadScript script = parse_workload(
      "alloc\nalloc\nalloc\nalloc\nalloc\ndelete 4\nalloc\nsnapshot");
  const auto trace =
      run_workload(script, InspectionMode::LastRecord, fixture.store());

  REQUIRE(trace.size() == 8);
  CHECK(alloc_ids(trace, false) ==
        std::vector<std::int64_t>{1, 2, 3, 4, 5, 6});
  CHECK(alloc_ids(trace, true) == alloc_ids(trace, false));
  for (const TraceEvent& event : trace) CHECK_FALSE(event.divergent);

  CHECK(trace.back().snapshot->trc == 5);
  CHECK(trace.back().snapshot->max_pi == 6);

  CHECK(sequence_values(*fixture.store().open_table("replay"), "id") ==
        std::vector<std::int64_t>{1, 2, 3, 5, 6});

  CHECK(diff_traces(trace).total == 0);
  CHECK_FALSE(diff_traces(trace).first_step.has_value());
}

TEST_CASE("deleting the maximum row makes the allocators diverge") {
  StoreFixture fixture(Backend::Memory);
  const WorkloadScript script = parse_workload(
      "alloc\nalloc\nalloc\nalloc\nalloc\ndelete 4\ndelete 5\nalloc");
  const auto trace =
      run_workload(script, InspectionMode::LastRecord, fixture.store());

  const TraceEvent& last = trace.back();
  CHECK(last.seq_core_id == 4);
  CHECK(last.native_id == 6);
  CHECK(last.divergent);

  const DivergenceSummary summary = diff_traces(trace);
  CHECK(summary.total == 1);
  CHECK(summary.first_step == 7);
  REQUIRE(summary.divergences.size() == 1);
  CHECK(summary.divergences[0].cause == DivergenceCause::MaxRowDeleted);
  CHECK(summary.to_json().dump() ==
        R"({"divergences":1,"first_step":7,"events":[{"step":7,"cause":"max-row-deleted"}]})");
}

TEST_CASE("strict-max inspection survives manual low inserts") {
  const std::string text = "insert 10\ninsert 2\nalloc";

  StoreFixture relaxed(Backend::Memory);
  const auto last_record = run_workload(parse_workload(text),
                                        InspectionMode::LastRecord,
                                        relaxed.store());
  CHECK(last_record.back().seq_core_id == 3);
  CHECK(last_record.back().native_id == 11);
  CHECK(last_record.back().divergent);
  const DivergenceSummary summary = diff_traces(last_record);
  REQUIRE(summary.total == 1);
  CHECK(summary.divergences[0].cause == DivergenceCause::ManualInsert);

  StoreFixture strict(Backend::Memory);
  const auto strict_max = run_workload(parse_workload(text),
                                       InspectionMode::StrictMax,
                                       strict.store());
  CHECK(strict_max.back().seq_core_id == 11);
  CHECK_FALSE(strict_max.back().divergent);
  CHECK(diff_traces(strict_max).total == 0);
}

TEST_CASE("a delete of the maximum classifies ahead of manual inserts") {
  StoreFixture fixture(Backend::Memory);
  const auto trace = run_workload(
      parse_workload("insert 2\nalloc\ndelete 3\nalloc"),
      InspectionMode::LastRecord, fixture.store());
  // step 1 allocates 3 on both sides; deleting it reopens the slot
  const DivergenceSummary summary = diff_traces(trace);
  REQUIRE(summary.total == 1);
  CHECK(summary.first_step == 3);
  CHECK(summary.divergences[0].cause == DivergenceCause::MaxRowDeleted);
}

TEST_CASE("an empty script replays to an empty trace") {
  StoreFixture fixture(Backend::Memory);
  const auto trace =
      run_workload({}, InspectionMode::LastRecord, fixture.store());
  CHECK(trace.empty());
  CHECK(diff_traces(trace).total == 0);
  CHECK(fixture.store().open_table("replay")->count_rows() == 0);
}

TEST_CASE("replay is deterministic") {
  const WorkloadScript script = parse_workload(
      "alloc\ninsert 9\nalloc\ndelete 9\nalloc\nsnapshot\ndelete 1\nalloc");
  StoreFixture first(Backend::Memory);
  StoreFixture second(Backend::Memory);
  const auto a =
      run_workload(script, InspectionMode::LastRecord, first.store());
  const auto b =
      run_workload(script, InspectionMode::LastRecord, second.store());
  CHECK(trace_to_text(a) == trace_to_text(b));
}

TEST_CASE("trace events serialize one line per step") {
  StoreFixture fixture(Backend::Memory);
  const auto trace = run_workload(parse_workload("alloc\nsnapshot"),
                                  InspectionMode::LastRecord, fixture.store());
  REQUIRE(trace.size() == 2);
  CHECK(trace[0].to_json().dump() ==
        R"({"step":0,"command":"alloc","seq_core":1,"native":1,"divergent":false})");
  CHECK(trace[1].to_json().dump() ==
        R"({"step":1,"command":"snapshot","snapshot":{"trc":1,"max_pi":1},"divergent":false})");
  CHECK(trace_to_text(trace) ==
        trace[0].to_json().dump() + "\n" + trace[1].to_json().dump() + "\n");
}

TEST_CASE("replay failures name the step that raised them") {
  StoreFixture fixture(Backend::Memory);
  const WorkloadScript script{
      Command::insert(std::numeric_limits<std::int64_t>::max()),
      Command::alloc()};
  CHECK_THROWS_WITH(
      run_workload(script, InspectionMode::LastRecord, fixture.store()),
      Catch::Matchers::StartsWith("step 1:"));
}

TEST_CASE("replay refuses a table name that is already taken") {
  StoreFixture fixture(Backend::Memory);
  fixture.store().create_table(replay_schema("replay"));
  CHECK_THROWS_AS(
      run_workload({}, InspectionMode::LastRecord, fixture.store()),
      AlreadyExistsError);
}

TEST_CASE("pure allocation scripts never diverge") {
  std::mt19937_64 rng(0x5eed0012);
  std::uniform_int_distribution<int> length(0, 40);
  for (int round = 0; round < 50; ++round) {
    StoreFixture fixture(Backend::Memory);
    const WorkloadScript script(static_cast<std::size_t>(length(rng)),
                                Command::alloc());
    const InspectionMode mode = round % 2 == 0 ? InspectionMode::LastRecord
                                               : InspectionMode::StrictMax;
    const auto trace = run_workload(script, mode, fixture.store());
    REQUIRE(diff_traces(trace).total == 0);
    REQUIRE(alloc_ids(trace, false) == alloc_ids(trace, true));
  }
}

TEST_CASE("audit reports the gap left by a deleted receipt") {
  const Backend backend = GENERATE(Backend::Memory, Backend::File);
  INFO("backend: " << backend_name(backend));
  StoreFixture fixture(backend);
  auto table = receipts_with_gap(fixture.store());

  const AuditReport report = audit_table(*table, "Rcpt_SL");
  CHECK(report.duplicates.empty());
  CHECK(report.non_positive.empty());
  CHECK(report.gaps == std::vector<std::int64_t>{4});
  CHECK_FALSE(report.modes_disagree);
  CHECK_FALSE(report.empty());
  CHECK(report.to_json().dump() ==
        R"({"duplicates":[],"non_positive":[],"gaps":[4],"modes_disagree":false})");
}

TEST_CASE("audit of a clean table is empty") {
  StoreFixture fixture(Backend::Memory);
  auto table = fixture.store().create_table(replay_schema("clean"));
  CHECK(audit_table(*table, "id").empty());

  for (std::int64_t v : {1, 2, 3}) table->insert_row(Row{{"id", Value{v}}});
  CHECK(audit_table(*table, "id").empty());
}

TEST_CASE("audit flags duplicates, stragglers and mode disagreement") {
  StoreFixture fixture(Backend::Memory);
  auto table = fixture.store().create_table(replay_schema("messy"));
  for (std::int64_t v : {10, 2, 2, -5, 0}) {
    table->insert_row(Row{{"id", Value{v}}});
  }

  const AuditReport report = audit_table(*table, "id");
  CHECK(report.duplicates == std::vector<std::int64_t>{2});
  CHECK(report.non_positive == std::vector<std::int64_t>{-5, 0});
  CHECK(report.gaps ==
        std::vector<std::int64_t>{1, 3, 4, 5, 6, 7, 8, 9});
  CHECK(report.modes_disagree);  // last row holds 0, the maximum is 10
}

TEST_CASE("audit on an unusable column is a schema error") {
  StoreFixture fixture(Backend::Memory);
  auto table = fixture.store().create_table(fees_schema());
  CHECK_THROWS_AS(audit_table(*table, "Branch"), SchemaError);
  CHECK_THROWS_AS(audit_table(*table, "absent"), SchemaError);
}

TEST_CASE("audit gaps match a set-difference oracle") {
  std::mt19937_64 rng(0x5eed0013);
  std::uniform_int_distribution<std::int64_t> pick(1, 30);
  std::uniform_int_distribution<int> length(0, 40);

  for (int round = 0; round < 60; ++round) {
    StoreFixture fixture(Backend::Memory);
    auto table = fixture.store().create_table(replay_schema("t"));
    std::multiset<std::int64_t> inserted;
    const int n = length(rng);
    for (int i = 0; i < n; ++i) {
      const std::int64_t v = pick(rng);
      table->insert_row(Row{{"id", Value{v}}});
      inserted.insert(v);
    }

    std::vector<std::int64_t> expected_gaps;
    const std::int64_t top =
        inserted.empty() ? 0 : *inserted.rbegin();
    for (std::int64_t id = 1; id <= top; ++id) {
      if (!inserted.contains(id)) expected_gaps.push_back(id);
    }
    std::set<std::int64_t> expected_dups;
    for (const std::int64_t v : inserted) {
      if (inserted.count(v) > 1) expected_dups.insert(v);
    }

    const AuditReport report = audit_table(*table, "id");
    REQUIRE(report.gaps == expected_gaps);
    REQUIRE(report.duplicates ==
            std::vector<std::int64_t>(expected_dups.begin(),
                                      expected_dups.end()));
    REQUIRE(report.non_positive.empty());
  }
}

#include <doctest.h>

#include "helpers.hpp"
#include "toolbench/baselines.hpp"
#include "toolbench/runner.hpp"

using namespace toolbench;
using namespace toolbench::testing;

namespace {

Json plan_step(const char* tool, Json args, bool optional = false) {
  return Json{{"tool", tool}, {"args", args}, {"optional", optional}};
}

TaskRecord planned_crud_task() {
  TaskRecord t = crud_task();
  t.success_criteria = {StateKeyValue{"records/r1", "status", "open"},
                        StateKeyValue{"records/r1", "owner", "kit"}};
  t.goal_annotation =
      Json{{"plan",
            Json::array(
                {plan_step("create_record",
                           Json{{"id", "r1"}, {"fields", Json{{"status", "open"}}}}),
                 plan_step("update_record",
                           Json{{"id", "r1"}, {"fields", Json{{"owner", "kit"}}}}),
                 plan_step("read_record", Json{{"id", "r1"}}, true)})},
           {"policy_rules", Json::array()}};
  return t;
}

void add_fault(TaskRecord& t, FaultType type, const char* tool,
               int fail_count = 0) {
  FaultSpec f;
  f.fault_type = type;
  f.trigger = TriggerToolName{tool};
  f.fail_count_before_recovery = fail_count;
  if (type == FaultType::kRateLimit) f.retry_after_steps = 17;
  t.fault_plan.push_back(f);
}

}  // namespace

TEST_CASE("edit distance basics") {
  CHECK(edit_distance("", "") == 0);
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("fields", "record_fields") == 7);
  CHECK(edit_distance("", "xyz") == 3);
}

TEST_CASE("factory knows all three baselines") {
  for (const auto& name : baseline_names()) CHECK(make_baseline(name) != nullptr);
  CHECK_THROWS(make_baseline("gpt"));
}

TEST_CASE("heuristic walks the plan and succeeds on a clean task") {
  const TaskRecord t = planned_crud_task();
  auto agent = make_baseline("heuristic");
  const EpisodeTrace trace = run_episode(t, *agent);
  CHECK(trace.termination == Termination::kSuccess);
  CHECK(trace.tool_calls_used == 2);
}

TEST_CASE("heuristic abandons on the first error") {
  TaskRecord t = planned_crud_task();
  add_fault(t, FaultType::kTimeout, "create_record", 1);
  auto agent = make_baseline("heuristic");
  const EpisodeTrace trace = run_episode(t, *agent);
  CHECK(trace.termination == Termination::kFinishWithoutSuccess);
  CHECK(trace.tool_calls_used == 1);
}

TEST_CASE("repair re-issues through a transient timeout") {
  TaskRecord t = planned_crud_task();
  add_fault(t, FaultType::kTimeout, "create_record", 1);
  auto agent = make_baseline("schema_repair");
  const EpisodeTrace trace = run_episode(t, *agent);
  CHECK(trace.termination == Termination::kSuccess);
  CHECK(trace.tool_calls_used == 3);
}

TEST_CASE("repair gives up on a persistent timeout within retry budget") {
  TaskRecord t = planned_crud_task();
  add_fault(t, FaultType::kTimeout, "create_record", 0);
  auto agent = make_baseline("schema_repair");
  const EpisodeTrace trace = run_episode(t, *agent);
  CHECK(trace.termination == Termination::kFinishWithoutSuccess);
  // Original call plus max_retries re-issues, never overflowing.
  CHECK(trace.tool_calls_used == 1 + t.budgets.max_retries);
}

TEST_CASE("repair rebuilds drifted arguments from hint pairing") {
  TaskRecord t = planned_crud_task();
  FaultSpec drift;
  drift.fault_type = FaultType::kSchemaDrift;
  drift.trigger = TriggerToolName{"create_record"};
  drift.param_rename_map = {{"fields", "record_fields"}};
  t.fault_plan = {drift};

  auto agent = make_baseline("schema_repair");
  const EpisodeTrace trace = run_episode(t, *agent);
  CHECK(trace.termination == Termination::kSuccess);
  REQUIRE(trace.steps.size() >= 2);
  const auto& repaired = trace.steps[1].action.call;
  CHECK(repaired.arguments.count("record_fields") == 1);
  CHECK(repaired.arguments.count("fields") == 0);
}

TEST_CASE("repair abandons on unauthorized and on renamed tools") {
  TaskRecord t = planned_crud_task();
  add_fault(t, FaultType::kAuthFailure, "create_record");
  auto agent = make_baseline("schema_repair");
  CHECK(run_episode(t, *agent).termination ==
        Termination::kFinishWithoutSuccess);

  TaskRecord t2 = planned_crud_task();
  FaultSpec drift;
  drift.fault_type = FaultType::kSchemaDrift;
  drift.trigger = TriggerToolName{"create_record"};
  drift.tool_rename = {"create_record", "create_record_v2"};
  t2.fault_plan = {drift};
  auto agent2 = make_baseline("schema_repair");
  const EpisodeTrace trace = run_episode(t2, *agent2);
  CHECK(trace.termination == Termination::kFinishWithoutSuccess);
  CHECK(trace.tool_calls_used == 1);
}

TEST_CASE("repair never succeeds against a persistent rate limit") {
  TaskRecord t = planned_crud_task();
  add_fault(t, FaultType::kRateLimit, "create_record");
  auto agent = make_baseline("schema_repair");
  const EpisodeTrace trace = run_episode(t, *agent);
  CHECK(trace.termination == Termination::kFinishWithoutSuccess);
}

TEST_CASE("policy aware skips forbidden plan steps") {
  TaskRecord t = planned_crud_task();
  // A plan that starts with a forbidden call; criteria only need the rest.
  t.policy_rules = {ForbiddenTool{"list_records"}};
  t.goal_annotation["plan"].insert(t.goal_annotation["plan"].begin(),
                                   plan_step("list_records", Json::object()));
  t.goal_annotation["policy_rules"] =
      Json::array({to_json(PolicyRule{ForbiddenTool{"list_records"}})});

  auto aware = make_baseline("policy_aware");
  const EpisodeTrace trace = run_episode(t, *aware);
  CHECK(trace.termination == Termination::kSuccess);
  CHECK(trace.policy_violations == 0);

  auto naive = make_baseline("heuristic");
  const EpisodeTrace naive_trace = run_episode(t, *naive);
  CHECK(naive_trace.policy_violations == 1);
}

TEST_CASE("policy aware reorders to satisfy success prerequisites") {
  TaskRecord t = planned_crud_task();
  t.policy_rules = {RequireSuccessBefore{"create_record", "update_record"}};
  t.goal_annotation["policy_rules"] = Json::array(
      {to_json(PolicyRule{RequireSuccessBefore{"create_record", "update_record"}})});
  // Deliberately swap the first two plan steps.
  std::swap(t.goal_annotation["plan"][0], t.goal_annotation["plan"][1]);

  auto aware = make_baseline("policy_aware");
  const EpisodeTrace trace = run_episode(t, *aware);
  CHECK(trace.termination == Termination::kSuccess);
  CHECK(trace.policy_violations == 0);
  CHECK(trace.steps[0].action.call.tool_name == "create_record");
}

TEST_CASE("policy aware stops retrying at a per-tool call cap") {
  TaskRecord t = planned_crud_task();
  add_fault(t, FaultType::kTimeout, "create_record", 0);
  t.budgets.max_retries = 5;
  t.policy_rules = {MaxCallsPerTool{"create_record", 2}};
  t.goal_annotation["policy_rules"] =
      Json::array({to_json(PolicyRule{MaxCallsPerTool{"create_record", 2}})});

  auto aware = make_baseline("policy_aware");
  const EpisodeTrace trace = run_episode(t, *aware);
  CHECK(trace.policy_violations == 0);
  CHECK(trace.tool_calls_used == 2);

  auto repair = make_baseline("schema_repair");
  const EpisodeTrace repair_trace = run_episode(t, *repair);
  CHECK(repair_trace.policy_violations > 0);
}

TEST_CASE("baselines are deterministic across repeated runs") {
  TaskRecord t = planned_crud_task();
  add_fault(t, FaultType::kTimeout, "create_record", 1);
  for (const auto& name : baseline_names()) {
    auto a = make_baseline(name);
    auto b = make_baseline(name);
    CHECK(trace_lines(run_episode(t, *a)) == trace_lines(run_episode(t, *b)));
  }
}

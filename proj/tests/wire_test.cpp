#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "toolbench/baselines.hpp"
#include "toolbench/wire.hpp"

using namespace toolbench;
using namespace toolbench::testing;

TEST_CASE("act messages round-trip both action shapes") {
  const AgentAction finish = AgentAction::make_finish();
  CHECK(parse_act_message(act_message(finish)).finish);

  const AgentAction do_call = call("read_record", {{"id", "r1"}});
  const AgentAction back = parse_act_message(act_message(do_call));
  CHECK(!back.finish);
  CHECK(back.call.tool_name == "read_record");
  CHECK(back.call.arguments.at("id") == "r1");
}

TEST_CASE("malformed act replies raise protocol errors") {
  CHECK_THROWS_AS(parse_act_message(parse_json(R"({"type":"observe"})")),
                  AgentProtocolError);
  CHECK_THROWS_AS(parse_act_message(parse_json(R"({"type":"act","action":"dance"})")),
                  AgentProtocolError);
  CHECK_THROWS_AS(parse_act_message(parse_json(R"({"type":"act","action":{}})")),
                  AgentProtocolError);
  CHECK_THROWS_AS(parse_act_message(parse_json(R"({"no_type":1})")),
                  AgentProtocolError);
}

TEST_CASE("reset and observe messages carry the episode context") {
  TaskRecord t = crud_task();
  const Json reset = reset_message(ResetInfo{
      t.task_id, t.instruction, t.tool_schemas, t.budgets, t.goal_annotation});
  CHECK(reset.at("type") == "reset");
  CHECK(reset.at("task_id") == t.task_id);
  CHECK(reset.at("tool_schemas").size() == t.tool_schemas.size());
  CHECK(reset.at("budgets").at("max_retries") == 2);

  Observation obs;
  obs.step_index = 3;
  obs.remaining = {9, 7, 2};
  const Json observe = observe_message(obs);
  CHECK(observe.at("last_result").is_null());
  CHECK(observe.at("remaining").at("tool_calls") == 7);

  obs.last_result = ToolResult::success(Json{{"id", "r1"}});
  CHECK(observe_message(obs).at("last_result").at("ok") == true);
}

TEST_CASE("serve_agent speaks the protocol over streams") {
  TaskRecord t = crud_task();
  t.goal_annotation = Json{
      {"plan", Json::array({Json{{"tool", "list_records"},
                                 {"args", Json::object()},
                                 {"optional", false}}})},
      {"policy_rules", Json::array()}};

  std::stringstream in;
  in << canonical_bytes(reset_message(ResetInfo{t.task_id, t.instruction,
                                                t.tool_schemas, t.budgets,
                                                t.goal_annotation}))
     << "\n";
  Observation obs;
  obs.step_index = 0;
  obs.remaining = {12, 10, 2};
  in << canonical_bytes(observe_message(obs)) << "\n";

  std::stringstream out;
  auto agent = make_baseline("heuristic");
  serve_agent(*agent, in, out);

  std::string line;
  REQUIRE(std::getline(out, line));
  CHECK(parse_json(line).at("type") == "ready");
  REQUIRE(std::getline(out, line));
  const AgentAction action = parse_act_message(parse_json(line));
  CHECK(!action.finish);
  CHECK(action.call.tool_name == "list_records");
}

TEST_CASE("spawning a missing binary fails before any episode") {
  CHECK_THROWS_AS(spawn_external_agent({"/no/such/binary-xyz"}, 1000),
                  std::runtime_error);
}

#pragma once

#include <functional>

#include "toolbench/agent.hpp"
#include "toolbench/task.hpp"

namespace toolbench::testing {

inline ParamSpec param(const char* name, ValueKind kind = ValueKind::kString,
                       bool required = true) {
  ParamSpec p;
  p.name = name;
  p.value_kind = kind;
  p.required = required;
  return p;
}

inline ToolSchema tool(const char* name, std::vector<ParamSpec> params) {
  ToolSchema t;
  t.name = name;
  t.description = name;
  t.params = std::move(params);
  return t;
}

// Minimal valid crud task, customizable after the fact.
inline TaskRecord crud_task() {
  TaskRecord t;
  t.task_id = "t-crud-1";
  t.domain = Domain::kCrud;
  t.instruction = "Create record 'r1' with status open.";
  t.tool_schemas = {
      tool("create_record", {param("id"), param("fields", ValueKind::kMap)}),
      tool("update_record", {param("id"), param("fields", ValueKind::kMap)}),
      tool("read_record", {param("id")}),
      tool("list_records", {}),
  };
  t.initial_state = Json{{"records", Json::object()}};
  t.success_criteria = {StateKeyValue{"records/r1", "status", "open"}};
  t.budgets = Budget{12, 10, 2, 1000};
  t.seed = 99;
  t.version = "1.0.0";
  return t;
}

// Drives episodes from a lambda; handy for scripted call sequences.
class LambdaAgent : public Agent {
 public:
  using Act = std::function<AgentAction(const Observation&)>;
  explicit LambdaAgent(Act act) : act_(std::move(act)) {}
  void reset(const ResetInfo&) override {}
  AgentAction act(const Observation& obs) override { return act_(obs); }

 private:
  Act act_;
};

class SequenceAgent : public Agent {
 public:
  explicit SequenceAgent(std::vector<AgentAction> actions)
      : actions_(std::move(actions)) {}
  void reset(const ResetInfo&) override { next_ = 0; }
  AgentAction act(const Observation&) override {
    if (next_ >= actions_.size()) return AgentAction::make_finish();
    return actions_[next_++];
  }

 private:
  std::vector<AgentAction> actions_;
  size_t next_ = 0;
};

inline AgentAction call(const char* tool,
                        std::map<std::string, Json> args = {}) {
  return AgentAction::make_call(ToolCall{tool, std::move(args)});
}

}  // namespace toolbench::testing

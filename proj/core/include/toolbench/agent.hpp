#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "toolbench/environment.hpp"
#include "toolbench/task.hpp"

namespace toolbench {

// What an agent is told at episode start. Never includes the fault plan,
// success criteria, or the drifted schemas.
struct ResetInfo {
  std::string task_id;
  std::string instruction;
  std::vector<ToolSchema> tool_schemas;
  Budget budgets;
  Json goal_annotation;
};

struct RemainingBudget {
  int steps = 0;
  int tool_calls = 0;
  int retries = 0;
};

struct Observation {
  int step_index = 0;  // completed steps so far
  RemainingBudget remaining;
  std::optional<ToolResult> last_result;  // agent-visible, post-rewrite
};

struct AgentAction {
  bool finish = false;
  ToolCall call;  // valid when !finish

  static AgentAction make_finish() { return AgentAction{true, {}}; }
  static AgentAction make_call(ToolCall c) { return AgentAction{false, std::move(c)}; }
};

// Raised by agent transports on malformed or missing replies; the runner
// maps it to an agent_protocol_error termination.
struct AgentProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual void reset(const ResetInfo& info) = 0;
  virtual AgentAction act(const Observation& obs) = 0;
};

}  // namespace toolbench

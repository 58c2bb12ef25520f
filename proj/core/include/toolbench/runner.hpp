#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toolbench/agent.hpp"
#include "toolbench/environment.hpp"
#include "toolbench/task.hpp"

namespace toolbench {

enum class Termination {
  kSuccess,
  kFinishWithoutSuccess,
  kBudgetSteps,
  kBudgetCalls,
  kRetryOverflow,
  kAgentProtocolError
};

const char* to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct BudgetCounters {
  int steps_used = 0;
  int calls_used = 0;
  int retries_used = 0;
};

struct StepRecord {
  int step = 0;  // 1-based
  AgentAction action;
  std::optional<bool> valid;  // schema validation outcome, when reached
  std::optional<FaultContext> fault_context;
  std::optional<ToolResult> result;  // agent-visible, post-rewrite
  std::vector<std::string> policy_events;
  BudgetCounters budget;
  std::string state_digest;
};

struct EpisodeTrace {
  std::string task_id;
  std::vector<StepRecord> steps;
  Termination termination = Termination::kFinishWithoutSuccess;
  int tool_calls_used = 0;
  int policy_violations = 0;
};

Json to_json(const StepRecord&);
StepRecord step_record_from_json(const Json&);

// Trace file form: one StepRecord per line, then one end record carrying
// task_id, termination, and call count.
std::vector<std::string> trace_lines(const EpisodeTrace&);
EpisodeTrace trace_from_lines(const std::vector<std::string>& lines);

// Drives one agent through one task. Never throws on task content; agent
// protocol failures terminate the episode as agent_protocol_error.
EpisodeTrace run_episode(const TaskRecord& task, Agent& agent);

struct ReplayVerdict {
  bool ok = true;
  int diverged_at_step = 0;  // 0 when ok
  std::string detail;
};

// Re-executes the recorded action sequence through a fresh environment and
// fault runtime, then compares every step record and the termination.
ReplayVerdict replay_trace(const TaskRecord& task, const EpisodeTrace& trace);

}  // namespace toolbench

#include "toolbench/runner.hpp"

#include <map>
#include <set>
#include <stdexcept>

#include "toolbench/fault.hpp"
#include "toolbench/scoring.hpp"

namespace toolbench {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kSuccess: return "success";
    case Termination::kFinishWithoutSuccess: return "finish_without_success";
    case Termination::kBudgetSteps: return "budget_steps";
    case Termination::kBudgetCalls: return "budget_calls";
    case Termination::kRetryOverflow: return "retry_overflow";
    case Termination::kAgentProtocolError: return "agent_protocol_error";
  }
  return "?";
}

Termination termination_from_string(const std::string& s) {
  if (s == "success") return Termination::kSuccess;
  if (s == "finish_without_success") return Termination::kFinishWithoutSuccess;
  if (s == "budget_steps") return Termination::kBudgetSteps;
  if (s == "budget_calls") return Termination::kBudgetCalls;
  if (s == "retry_overflow") return Termination::kRetryOverflow;
  if (s == "agent_protocol_error") return Termination::kAgentProtocolError;
  throw std::invalid_argument("unknown termination '" + s + "'");
}

Json to_json(const StepRecord& s) {
  Json j{{"step", s.step},
         {"budget",
          Json{{"steps_used", s.budget.steps_used},
               {"calls_used", s.budget.calls_used},
               {"retries_used", s.budget.retries_used}}},
         {"state_digest", s.state_digest}};
  j["action"] = s.action.finish ? Json("finish") : Json{{"call", to_json(s.action.call)}};
  if (s.valid) j["valid"] = *s.valid;
  if (s.fault_context) j["fault_context"] = to_json(*s.fault_context);
  if (s.result) j["result"] = to_json(*s.result);
  if (!s.policy_events.empty()) j["policy_events"] = s.policy_events;
  return j;
}

StepRecord step_record_from_json(const Json& j) {
  StepRecord s;
  s.step = j.at("step").get<int>();
  if (j.at("action").is_string()) {
    s.action = AgentAction::make_finish();
  } else {
    s.action = AgentAction::make_call(tool_call_from_json(j.at("action").at("call")));
  }
  if (j.contains("valid")) s.valid = j.at("valid").get<bool>();
  if (j.contains("fault_context"))
    s.fault_context = fault_context_from_json(j.at("fault_context"));
  if (j.contains("result")) s.result = tool_result_from_json(j.at("result"));
  if (j.contains("policy_events"))
    s.policy_events = j.at("policy_events").get<std::vector<std::string>>();
  const Json& b = j.at("budget");
  s.budget.steps_used = b.at("steps_used").get<int>();
  s.budget.calls_used = b.at("calls_used").get<int>();
  s.budget.retries_used = b.at("retries_used").get<int>();
  s.state_digest = j.at("state_digest").get<std::string>();
  return s;
}

std::vector<std::string> trace_lines(const EpisodeTrace& trace) {
  std::vector<std::string> lines;
  lines.reserve(trace.steps.size() + 1);
  for (const auto& s : trace.steps) lines.push_back(canonical_bytes(to_json(s)));
  lines.push_back(canonical_bytes(
      Json{{"end", true},
           {"task_id", trace.task_id},
           {"termination", to_string(trace.termination)},
           {"tool_calls_used", trace.tool_calls_used},
           {"policy_violations", trace.policy_violations}}));
  return lines;
}

EpisodeTrace trace_from_lines(const std::vector<std::string>& lines) {
  if (lines.empty()) throw std::invalid_argument("empty trace");
  EpisodeTrace trace;
  for (size_t i = 0; i + 1 < lines.size(); ++i)
    trace.steps.push_back(step_record_from_json(parse_json(lines[i])));
  const Json end = parse_json(lines.back());
  if (!end.value("end", false)) throw std::invalid_argument("missing trace end record");
  trace.task_id = end.at("task_id").get<std::string>();
  trace.termination = termination_from_string(end.at("termination").get<std::string>());
  trace.tool_calls_used = end.at("tool_calls_used").get<int>();
  trace.policy_violations = end.at("policy_violations").get<int>();
  return trace;
}

namespace {

struct PolicyState {
  std::map<std::string, int> calls_per_tool;
  std::set<std::string> succeeded_tools;
};

// Returns the violated rule descriptions; empty when the call is allowed.
std::vector<std::string> policy_check(const TaskRecord& task,
                                      const PolicyState& ps,
                                      const ToolCall& call) {
  std::vector<std::string> violations;
  for (const auto& rule : task.policy_rules) {
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, ForbiddenTool>) {
            if (call.tool_name == r.tool)
              violations.push_back("forbidden_tool(" + r.tool + ")");
          } else if constexpr (std::is_same_v<T, MaxCallsPerTool>) {
            auto it = ps.calls_per_tool.find(r.tool);
            const int prior = it == ps.calls_per_tool.end() ? 0 : it->second;
            if (call.tool_name == r.tool && prior + 1 > r.limit)
              violations.push_back("max_calls_per_tool(" + r.tool + "," +
                                   std::to_string(r.limit) + ")");
          } else {
            if (call.tool_name == r.gated && !ps.succeeded_tools.count(r.prerequisite))
              violations.push_back("require_success_before(" + r.prerequisite +
                                   "," + r.gated + ")");
          }
        },
        rule);
  }
  return violations;
}

}  // namespace

EpisodeTrace run_episode(const TaskRecord& task, Agent& agent) {
  Environment env(task);
  FaultRuntime faults(task);
  faults.apply_static_drift(env);

  EpisodeTrace trace;
  trace.task_id = task.task_id;

  try {
    agent.reset(ResetInfo{task.task_id, task.instruction, task.tool_schemas,
                          task.budgets, task.goal_annotation});
  } catch (const AgentProtocolError&) {
    trace.termination = Termination::kAgentProtocolError;
    return trace;
  }

  BudgetCounters budget;
  PolicyState policy;
  int successful_calls = 0;
  std::optional<ToolResult> last_result;
  std::string prev_tool;
  bool prev_was_error = false;

  while (true) {
    if (budget.steps_used >= task.budgets.max_steps) {
      trace.termination = Termination::kBudgetSteps;
      break;
    }

    Observation obs;
    obs.step_index = budget.steps_used;
    obs.remaining = {task.budgets.max_steps - budget.steps_used,
                     task.budgets.max_tool_calls - budget.calls_used,
                     task.budgets.max_retries - budget.retries_used};
    obs.last_result = last_result;

    AgentAction action;
    try {
      action = agent.act(obs);
    } catch (const AgentProtocolError&) {
      trace.termination = Termination::kAgentProtocolError;
      break;
    }

    ++budget.steps_used;

    StepRecord step;
    step.step = budget.steps_used;
    step.action = action;

    if (action.finish) {
      step.budget = budget;
      step.state_digest = env.state_digest();
      trace.steps.push_back(step);
      trace.termination = check_criteria(env.live_state(), budget.calls_used,
                                         successful_calls, task.success_criteria)
                              ? Termination::kSuccess
                              : Termination::kFinishWithoutSuccess;
      break;
    }

    if (budget.calls_used >= task.budgets.max_tool_calls) {
      trace.termination = Termination::kBudgetCalls;
      break;
    }
    ++budget.calls_used;
    const int call_index = budget.calls_used;
    const ToolCall& call = action.call;

    // A retry is an immediate repeat of a tool right after its error.
    if (prev_was_error && call.tool_name == prev_tool) ++budget.retries_used;

    ToolResult result;
    step.policy_events = policy_check(task, policy, call);
    if (!step.policy_events.empty()) {
      ErrorPayload e;
      e.code = ErrorCode::kPolicyViolation;
      e.message = "policy violation: " + step.policy_events.front();
      result = ToolResult::failure(e);
      trace.policy_violations += static_cast<int>(step.policy_events.size());
    } else if (auto injected = faults.intercept(env, call, call_index)) {
      result = ToolResult::failure(*injected);
    } else if (auto invalid = env.validate_call(call)) {
      step.valid = false;
      result = ToolResult::failure(
          faults.annotate_drift_failure(*invalid, call, env));
    } else {
      step.valid = true;
      result = env.execute(faults.normalize_call(call));
    }
    policy.calls_per_tool[call.tool_name] += 1;

    if (result.ok) {
      ++successful_calls;
      policy.succeeded_tools.insert(call.tool_name);
      step.result = result;
    } else {
      step.fault_context = result.error.fault_context;
      ErrorPayload visible =
          faults.rewrite_error(result.error, call, env, call_index);
      if (!step.fault_context) step.fault_context = faults.last_rewrite_context();
      ToolResult visible_result = ToolResult::failure(visible);
      step.result = visible_result;
      result = visible_result;
    }

    prev_tool = call.tool_name;
    prev_was_error = !result.ok;
    last_result = result;

    step.budget = budget;
    step.state_digest = env.state_digest();
    trace.steps.push_back(step);
    trace.tool_calls_used = budget.calls_used;

    if (check_criteria(env.live_state(), budget.calls_used, successful_calls,
                       task.success_criteria)) {
      trace.termination = Termination::kSuccess;
      break;
    }
    if (budget.retries_used > task.budgets.max_retries) {
      trace.termination = Termination::kRetryOverflow;
      break;
    }
  }

  trace.tool_calls_used = budget.calls_used;
  return trace;
}

namespace {

// Feeds a recorded action sequence back through the harness.
class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(const EpisodeTrace& trace) : trace_(trace) {}

  void reset(const ResetInfo&) override { next_ = 0; }

  AgentAction act(const Observation&) override {
    if (next_ >= trace_.steps.size())
      throw AgentProtocolError("replay script exhausted");
    return trace_.steps[next_++].action;
  }

 private:
  const EpisodeTrace& trace_;
  size_t next_ = 0;
};

}  // namespace

ReplayVerdict replay_trace(const TaskRecord& task, const EpisodeTrace& trace) {
  if (trace.task_id != task.task_id)
    return {false, 0, "task_id mismatch"};

  ScriptedAgent agent(trace);
  EpisodeTrace fresh = run_episode(task, agent);

  const auto recorded = trace_lines(trace);
  const auto replayed = trace_lines(fresh);
  const size_t n = std::min(recorded.size(), replayed.size());
  for (size_t i = 0; i < n; ++i) {
    if (recorded[i] != replayed[i]) {
      const int step = i < trace.steps.size() ? trace.steps[i].step
                                              : static_cast<int>(i) + 1;
      return {false, step, "step record mismatch"};
    }
  }
  if (recorded.size() != replayed.size())
    return {false, static_cast<int>(n), "trace length mismatch"};
  return {true, 0, ""};
}

}  // namespace toolbench

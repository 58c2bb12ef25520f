#include "toolbench/validate.hpp"

#include <set>

namespace toolbench {

namespace {

bool kind_matches(ValueKind kind, const Json& v) {
  switch (kind) {
    case ValueKind::kString: return v.is_string();
    case ValueKind::kInteger: return v.is_number_integer();
    case ValueKind::kNumber: return v.is_number();
    case ValueKind::kBoolean: return v.is_boolean();
    case ValueKind::kList: return v.is_array();
    case ValueKind::kMap: return v.is_object();
  }
  return false;
}

const char* state_root_key(Domain d) {
  switch (d) {
    case Domain::kCrud: return "records";
    case Domain::kRetrieval: return "documents";
    case Domain::kFiles: return "files";
    case Domain::kScheduling: return "events";
  }
  return "";
}

}  // namespace

std::vector<ValidationError> validate_task(const TaskRecord& record) {
  std::vector<ValidationError> errors;
  auto err = [&](std::string rule, std::string field, std::string message) {
    errors.push_back({std::move(rule), std::move(field), std::move(message)});
  };

  if (record.task_id.empty())
    err("task_id_presence", "task_id", "task_id is empty");
  if (record.instruction.empty())
    err("instruction_presence", "instruction", "instruction is empty");
  if (record.success_criteria.empty())
    err("criteria_presence", "success_criteria", "success_criteria is empty");

  // Budgets.
  if (record.budgets.max_steps < 1)
    err("budget_bounds", "budgets.max_steps", "max_steps must be positive");
  if (record.budgets.max_tool_calls < 1)
    err("budget_bounds", "budgets.max_tool_calls", "max_tool_calls must be positive");
  if (record.budgets.max_retries < 0)
    err("budget_bounds", "budgets.max_retries", "max_retries must be non-negative");
  if (record.budgets.per_call_timeout_ms < 1)
    err("budget_bounds", "budgets.per_call_timeout_ms", "per_call_timeout_ms must be positive");
  if (record.budgets.max_tool_calls > record.budgets.max_steps)
    err("budget_bounds", "budgets", "max_tool_calls exceeds max_steps");

  // Tool schemas: unique tool names, unique param names.
  std::set<std::string> tool_names;
  for (const auto& tool : record.tool_schemas) {
    if (!tool_names.insert(tool.name).second)
      err("tool_name_uniqueness", "tool_schemas", "duplicate tool '" + tool.name + "'");
    std::set<std::string> param_names;
    for (const auto& p : tool.params) {
      if (!param_names.insert(p.name).second)
        err("param_name_uniqueness", tool.name, "duplicate param '" + p.name + "'");
      if (!p.allowed_values.empty()) {
        for (const auto& v : p.allowed_values)
          if (!kind_matches(p.value_kind, v))
            err("allowed_values_kind", tool.name + "." + p.name,
                "allowed value does not match declared kind");
      }
    }
  }
  auto has_tool = [&](const std::string& name) { return tool_names.count(name) > 0; };

  // Domain state consistency: the per-domain root container must exist.
  const char* root = state_root_key(record.domain);
  if (!record.initial_state.is_object() ||
      !record.initial_state.contains(root) ||
      !record.initial_state.at(root).is_object()) {
    err("state_consistency", "initial_state",
        std::string("missing or non-map root '") + root + "' for domain " +
            to_string(record.domain));
  }

  // Criteria structure.
  int ci = 0;
  for (const auto& c : record.success_criteria) {
    const std::string field = "success_criteria[" + std::to_string(ci++) + "]";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, MinToolCalls> ||
                        std::is_same_v<T, MinSuccessfulToolCalls>) {
            if (v.n < 1) err("criterion_structure", field, "n must be >= 1");
          } else {
            if (v.path.empty()) err("criterion_structure", field, "path is empty");
          }
        },
        c);
  }

  // Policy rules.
  int ri = 0;
  for (const auto& r : record.policy_rules) {
    const std::string field = "policy_rules[" + std::to_string(ri++) + "]";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, ForbiddenTool>) {
            if (!has_tool(v.tool))
              err("policy_tool_reference", field, "unknown tool '" + v.tool + "'");
          } else if constexpr (std::is_same_v<T, MaxCallsPerTool>) {
            if (!has_tool(v.tool))
              err("policy_tool_reference", field, "unknown tool '" + v.tool + "'");
            if (v.limit < 1) err("policy_structure", field, "limit must be >= 1");
          } else {
            if (!has_tool(v.prerequisite))
              err("policy_tool_reference", field, "unknown tool '" + v.prerequisite + "'");
            if (!has_tool(v.gated))
              err("policy_tool_reference", field, "unknown tool '" + v.gated + "'");
            if (v.prerequisite == v.gated)
              err("policy_structure", field, "prerequisite equals gated tool");
          }
        },
        r);
  }

  // Fault plan: references and behavior structure.
  int fi = 0;
  for (const auto& f : record.fault_plan) {
    const std::string field = "fault_plan[" + std::to_string(fi) + "]";

    const std::string* trigger_tool = nullptr;
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, TriggerToolName>) {
            trigger_tool = &t.name;
            if (!has_tool(t.name))
              err("fault_tool_reference", field, "unknown tool '" + t.name + "'");
          } else if constexpr (std::is_same_v<T, TriggerNthCall>) {
            if (t.n < 1) err("trigger_structure", field, "nth_call n must be >= 1");
          } else if constexpr (std::is_same_v<T, TriggerArgPattern>) {
            if (!has_tool(t.tool))
              err("fault_tool_reference", field, "unknown tool '" + t.tool + "'");
          } else {
            if (!(t.p > 0.0 && t.p <= 1.0))
              err("trigger_structure", field, "probability must be in (0, 1]");
          }
        },
        f.trigger);

    switch (f.fault_type) {
      case FaultType::kSchemaDrift: {
        std::set<std::string> targets;
        for (const auto& [from, to] : f.param_rename_map) {
          if (!targets.insert(to).second)
            err("drift_structure", field, "param rename map is not injective");
          if (trigger_tool && has_tool(*trigger_tool)) {
            const ToolSchema* tool = record.find_tool(*trigger_tool);
            if (tool && !tool->find_param(from))
              err("drift_structure", field,
                  "renamed param '" + from + "' not on tool '" + *trigger_tool + "'");
          }
        }
        if (f.tool_rename) {
          if (!has_tool(f.tool_rename->first))
            err("fault_tool_reference", field,
                "unknown tool '" + f.tool_rename->first + "'");
          if (has_tool(f.tool_rename->second))
            err("drift_structure", field,
                "tool rename target '" + f.tool_rename->second + "' already exists");
        }
        if (f.param_rename_map.empty() && !f.tool_rename)
          err("drift_structure", field, "schema_drift with no renames");
        break;
      }
      case FaultType::kRateLimit:
        if (f.retry_after_steps < 1)
          err("fault_structure", field, "retry_after_steps must be positive");
        if (f.recover_after_failures < 0)
          err("fault_structure", field, "recover_after_failures must be non-negative");
        break;
      case FaultType::kTimeout:
        if (f.fail_count_before_recovery < 0)
          err("fault_structure", field, "fail_count_before_recovery must be non-negative");
        break;
      case FaultType::kAuthFailure:
      case FaultType::kAdversarialRewrite:
        break;
    }
    ++fi;
  }

  return errors;
}

}  // namespace toolbench

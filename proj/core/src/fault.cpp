#include "toolbench/fault.hpp"

#include <algorithm>

namespace toolbench {

namespace {

std::string arg_render(const Json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::string describe_trigger(const Trigger& trigger) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, TriggerToolName>)
          return "tool_name(" + t.name + ")";
        else if constexpr (std::is_same_v<T, TriggerNthCall>)
          return "nth_call(" + std::to_string(t.n) + ")";
        else if constexpr (std::is_same_v<T, TriggerArgPattern>)
          return "arg_pattern(" + t.tool + "." + t.param + "~'" + t.substring + "')";
        else
          return "probabilistic(" + std::to_string(t.p) + ")";
      },
      trigger);
}

FaultRuntime::FaultRuntime(const TaskRecord& task) : task_(task) {
  state_.resize(task.fault_plan.size());
  for (size_t i = 0; i < task.fault_plan.size(); ++i) {
    if (std::holds_alternative<TriggerProbabilistic>(task.fault_plan[i].trigger)) {
      state_[i].stream.emplace(
          task.seed, "fault/" + task.task_id + "/" + std::to_string(i));
    }
  }
}

bool FaultRuntime::trigger_fires(size_t index, const ToolCall& call,
                                 int call_index) {
  PerFault& st = state_[index];
  ++st.evaluations;
  const Trigger& trigger = task_.fault_plan[index].trigger;
  return std::visit(
      [&](const auto& t) -> bool {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, TriggerToolName>) {
          return call.tool_name == t.name;
        } else if constexpr (std::is_same_v<T, TriggerNthCall>) {
          return call_index == t.n;
        } else if constexpr (std::is_same_v<T, TriggerArgPattern>) {
          if (call.tool_name != t.tool) return false;
          auto it = call.arguments.find(t.param);
          if (it == call.arguments.end()) return false;
          return arg_render(it->second).find(t.substring) != std::string::npos;
        } else {
          return st.stream->next_unit() < t.p;
        }
      },
      trigger);
}

void FaultRuntime::apply_drift_spec(const FaultSpec& spec, Environment& env,
                                    const std::string& fallback_tool) {
  std::string target = fallback_tool;
  if (const auto* by_tool = std::get_if<TriggerToolName>(&spec.trigger))
    target = by_tool->name;

  for (auto& schema : env.mutable_schemas()) {
    if (spec.tool_rename && schema.name == spec.tool_rename->first)
      schema.name = spec.tool_rename->second;
    if (schema.name == target || (spec.tool_rename && schema.name == spec.tool_rename->second)) {
      for (auto& param : schema.params) {
        auto it = spec.param_rename_map.find(param.name);
        if (it != spec.param_rename_map.end()) param.name = it->second;
      }
    }
  }
}

void FaultRuntime::apply_static_drift(Environment& env) {
  for (size_t i = 0; i < task_.fault_plan.size(); ++i) {
    const FaultSpec& spec = task_.fault_plan[i];
    if (spec.fault_type != FaultType::kSchemaDrift) continue;
    if (!std::holds_alternative<TriggerToolName>(spec.trigger)) continue;
    apply_drift_spec(spec, env, "");
    state_[i].drift_applied = true;
    state_[i].drift_target = std::get<TriggerToolName>(spec.trigger).name;
  }
}

std::optional<ErrorPayload> FaultRuntime::intercept(Environment& env,
                                                    const ToolCall& call,
                                                    int call_index) {
  // Dynamic drift triggers mutate the interface at first firing.
  for (size_t i = 0; i < task_.fault_plan.size(); ++i) {
    const FaultSpec& spec = task_.fault_plan[i];
    if (spec.fault_type != FaultType::kSchemaDrift) continue;
    if (std::holds_alternative<TriggerToolName>(spec.trigger)) continue;
    if (state_[i].drift_applied) continue;
    if (trigger_fires(i, call, call_index)) {
      apply_drift_spec(spec, env, call.tool_name);
      state_[i].drift_applied = true;
      state_[i].drift_target = call.tool_name;
    }
  }

  // Fixed family order: auth, rate limit, timeout. First triggering spec
  // within a family wins; at most one family injects per call.
  for (FaultType family :
       {FaultType::kAuthFailure, FaultType::kRateLimit, FaultType::kTimeout}) {
    for (size_t i = 0; i < task_.fault_plan.size(); ++i) {
      const FaultSpec& spec = task_.fault_plan[i];
      if (spec.fault_type != family) continue;
      PerFault& st = state_[i];
      if (st.recovered) continue;
      if (!trigger_fires(i, call, call_index)) continue;

      ErrorPayload e;
      e.fault_context = FaultContext{family, static_cast<int>(i),
                                     describe_trigger(spec.trigger)};
      switch (family) {
        case FaultType::kAuthFailure:
          if (!spec.persistent && st.injections > 0) {
            st.recovered = true;
            continue;
          }
          e.code = ErrorCode::kUnauthorized;
          e.message = "unauthorized: access to '" + call.tool_name + "' denied";
          break;
        case FaultType::kRateLimit:
          if (spec.recover_after_failures > 0 &&
              st.injections >= spec.recover_after_failures) {
            st.recovered = true;
            continue;
          }
          if (st.injections > 0 && call_index >= st.cooldown_until_call) {
            st.recovered = true;
            continue;
          }
          e.code = ErrorCode::kRateLimited;
          e.message = "rate limited on '" + call.tool_name + "'";
          e.retry_after_steps = spec.retry_after_steps;
          st.cooldown_until_call = call_index + spec.retry_after_steps;
          break;
        case FaultType::kTimeout:
          if (spec.fail_count_before_recovery > 0 &&
              st.injections >= spec.fail_count_before_recovery) {
            st.recovered = true;
            continue;
          }
          e.code = ErrorCode::kTimeout;
          e.message = "call to '" + call.tool_name + "' timed out";
          break;
        default:
          continue;
      }
      ++st.injections;
      return e;
    }
  }
  return std::nullopt;
}

ToolCall FaultRuntime::normalize_call(const ToolCall& call) const {
  ToolCall out = call;
  for (size_t i = 0; i < task_.fault_plan.size(); ++i) {
    const FaultSpec& spec = task_.fault_plan[i];
    if (spec.fault_type != FaultType::kSchemaDrift || !state_[i].drift_applied)
      continue;
    if (spec.tool_rename && out.tool_name == spec.tool_rename->second)
      out.tool_name = spec.tool_rename->first;
    if (out.tool_name != state_[i].drift_target) continue;
    for (const auto& [original, drifted] : spec.param_rename_map) {
      auto it = out.arguments.find(drifted);
      if (it != out.arguments.end()) {
        out.arguments[original] = it->second;
        out.arguments.erase(drifted);
      }
    }
  }
  return out;
}

ErrorPayload FaultRuntime::annotate_drift_failure(ErrorPayload payload,
                                                  const ToolCall& call,
                                                  const Environment& env) {
  if (payload.code != ErrorCode::kUnknownTool &&
      payload.code != ErrorCode::kInvalidArguments)
    return payload;
  if (payload.fault_context) return payload;

  for (size_t i = 0; i < task_.fault_plan.size(); ++i) {
    const FaultSpec& spec = task_.fault_plan[i];
    if (spec.fault_type != FaultType::kSchemaDrift || !state_[i].drift_applied)
      continue;
    bool explains = false;
    if (spec.tool_rename && spec.tool_rename->first == call.tool_name)
      explains = true;
    if (state_[i].drift_target == call.tool_name) {
      for (const auto& unknown : payload.unknown_params)
        if (spec.param_rename_map.count(unknown)) explains = true;
    }
    if (explains) {
      payload.fault_context = FaultContext{FaultType::kSchemaDrift,
                                           static_cast<int>(i),
                                           describe_trigger(spec.trigger)};
      return payload;
    }
  }
  return payload;
}

ErrorPayload FaultRuntime::rewrite_error(const ErrorPayload& payload,
                                         const ToolCall& call,
                                         const Environment& env,
                                         int call_index) {
  last_rewrite_context_.reset();
  for (size_t i = 0; i < task_.fault_plan.size(); ++i) {
    const FaultSpec& spec = task_.fault_plan[i];
    if (spec.fault_type != FaultType::kAdversarialRewrite) continue;
    if (!trigger_fires(i, call, call_index)) continue;

    last_rewrite_context_ = FaultContext{FaultType::kAdversarialRewrite,
                                         static_cast<int>(i),
                                         describe_trigger(spec.trigger)};
    ErrorPayload out = payload;
    switch (spec.style) {
      case RewriteStyle::kVague:
        out.unknown_params.clear();
        out.missing_params.clear();
        out.retry_after_steps.reset();
        out.fault_context.reset();
        out.message = "request failed";
        break;
      case RewriteStyle::kMisleadingParam: {
        const ToolSchema* tool = nullptr;
        for (const auto& t : env.effective_schemas())
          if (t.name == call.tool_name) tool = &t;
        auto mislead = [&](std::vector<std::string>& names) {
          if (!tool || tool->params.empty()) return;
          for (auto& name : names) {
            size_t at = 0;
            for (size_t p = 0; p < tool->params.size(); ++p)
              if (tool->params[p].name == name) at = p;
            name = tool->params[(at + 1) % tool->params.size()].name;
          }
        };
        mislead(out.unknown_params);
        mislead(out.missing_params);
        break;
      }
      case RewriteStyle::kWrongToolHint: {
        const auto& schemas = env.effective_schemas();
        std::string hint;
        for (size_t t = 0; t < schemas.size(); ++t) {
          if (schemas[t].name == call.tool_name) {
            hint = schemas[(t + 1) % schemas.size()].name;
            break;
          }
        }
        if (hint.empty() && !schemas.empty()) hint = schemas.front().name;
        out.message = "request failed; try tool '" + hint + "' instead";
        break;
      }
    }
    return out;  // first triggering rewrite wins
  }
  return payload;
}

}  // namespace toolbench

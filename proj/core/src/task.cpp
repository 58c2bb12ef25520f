#include "toolbench/task.hpp"

#include <sstream>
#include <stdexcept>

namespace toolbench {

namespace {

[[noreturn]] void bad_value(const std::string& what, const std::string& got) {
  throw std::invalid_argument("task model: unknown " + what + " '" + got + "'");
}

}  // namespace

const char* to_string(Domain d) {
  switch (d) {
    case Domain::kCrud: return "crud";
    case Domain::kRetrieval: return "retrieval";
    case Domain::kFiles: return "files";
    case Domain::kScheduling: return "scheduling";
  }
  return "?";
}

Domain domain_from_string(const std::string& s) {
  if (s == "crud") return Domain::kCrud;
  if (s == "retrieval") return Domain::kRetrieval;
  if (s == "files") return Domain::kFiles;
  if (s == "scheduling") return Domain::kScheduling;
  bad_value("domain", s);
}

const char* to_string(ValueKind k) {
  switch (k) {
    case ValueKind::kString: return "string";
    case ValueKind::kInteger: return "integer";
    case ValueKind::kNumber: return "number";
    case ValueKind::kBoolean: return "boolean";
    case ValueKind::kList: return "list";
    case ValueKind::kMap: return "map";
  }
  return "?";
}

ValueKind value_kind_from_string(const std::string& s) {
  if (s == "string") return ValueKind::kString;
  if (s == "integer") return ValueKind::kInteger;
  if (s == "number") return ValueKind::kNumber;
  if (s == "boolean") return ValueKind::kBoolean;
  if (s == "list") return ValueKind::kList;
  if (s == "map") return ValueKind::kMap;
  bad_value("value_kind", s);
}

const char* to_string(FaultType t) {
  switch (t) {
    case FaultType::kSchemaDrift: return "schema_drift";
    case FaultType::kRateLimit: return "rate_limit";
    case FaultType::kTimeout: return "timeout";
    case FaultType::kAuthFailure: return "auth_failure";
    case FaultType::kAdversarialRewrite: return "adversarial_rewrite";
  }
  return "?";
}

FaultType fault_type_from_string(const std::string& s) {
  if (s == "schema_drift") return FaultType::kSchemaDrift;
  if (s == "rate_limit") return FaultType::kRateLimit;
  if (s == "timeout") return FaultType::kTimeout;
  if (s == "auth_failure") return FaultType::kAuthFailure;
  if (s == "adversarial_rewrite") return FaultType::kAdversarialRewrite;
  bad_value("fault_type", s);
}

const char* to_string(RewriteStyle s) {
  switch (s) {
    case RewriteStyle::kMisleadingParam: return "misleading_param";
    case RewriteStyle::kWrongToolHint: return "wrong_tool_hint";
    case RewriteStyle::kVague: return "vague";
  }
  return "?";
}

RewriteStyle rewrite_style_from_string(const std::string& s) {
  if (s == "misleading_param") return RewriteStyle::kMisleadingParam;
  if (s == "wrong_tool_hint") return RewriteStyle::kWrongToolHint;
  if (s == "vague") return RewriteStyle::kVague;
  bad_value("rewrite style", s);
}

const ParamSpec* ToolSchema::find_param(const std::string& param_name) const {
  for (const auto& p : params)
    if (p.name == param_name) return &p;
  return nullptr;
}

const ToolSchema* TaskRecord::find_tool(const std::string& name) const {
  for (const auto& t : tool_schemas)
    if (t.name == name) return &t;
  return nullptr;
}

// --- serialization ----------------------------------------------------------

Json to_json(const ParamSpec& p) {
  Json j{{"name", p.name},
         {"value_kind", to_string(p.value_kind)},
         {"required", p.required}};
  if (!p.allowed_values.empty()) j["allowed_values"] = p.allowed_values;
  return j;
}

ParamSpec param_spec_from_json(const Json& j) {
  ParamSpec p;
  p.name = j.at("name").get<std::string>();
  p.value_kind = value_kind_from_string(j.at("value_kind").get<std::string>());
  p.required = j.at("required").get<bool>();
  if (j.contains("allowed_values"))
    p.allowed_values = j.at("allowed_values").get<std::vector<Json>>();
  return p;
}

Json to_json(const ToolSchema& t) {
  Json params = Json::array();
  for (const auto& p : t.params) params.push_back(to_json(p));
  return Json{{"name", t.name},
              {"description", t.description},
              {"params", params}};
}

ToolSchema tool_schema_from_json(const Json& j) {
  ToolSchema t;
  t.name = j.at("name").get<std::string>();
  t.description = j.at("description").get<std::string>();
  for (const auto& p : j.at("params")) t.params.push_back(param_spec_from_json(p));
  return t;
}

Json to_json(const Budget& b) {
  return Json{{"max_steps", b.max_steps},
              {"max_tool_calls", b.max_tool_calls},
              {"max_retries", b.max_retries},
              {"per_call_timeout_ms", b.per_call_timeout_ms}};
}

Budget budget_from_json(const Json& j) {
  Budget b;
  b.max_steps = j.at("max_steps").get<int>();
  b.max_tool_calls = j.at("max_tool_calls").get<int>();
  b.max_retries = j.at("max_retries").get<int>();
  b.per_call_timeout_ms = j.at("per_call_timeout_ms").get<int>();
  return b;
}

Json to_json(const Criterion& c) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, StateEquals>)
          return Json{{"kind", "state_equals"}, {"path", v.path}, {"expected", v.expected}};
        else if constexpr (std::is_same_v<T, StateExists>)
          return Json{{"kind", "state_exists"}, {"path", v.path}};
        else if constexpr (std::is_same_v<T, StateContains>)
          return Json{{"kind", "state_contains"}, {"path", v.path}, {"member", v.member}};
        else if constexpr (std::is_same_v<T, StateKeyValue>)
          return Json{{"kind", "state_key_value"},
                      {"path", v.path},
                      {"key", v.key},
                      {"expected", v.expected}};
        else if constexpr (std::is_same_v<T, MinToolCalls>)
          return Json{{"kind", "min_tool_calls"}, {"n", v.n}};
        else
          return Json{{"kind", "min_successful_tool_calls"}, {"n", v.n}};
      },
      c);
}

Criterion criterion_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "state_equals")
    return StateEquals{j.at("path").get<std::string>(), j.at("expected")};
  if (kind == "state_exists") return StateExists{j.at("path").get<std::string>()};
  if (kind == "state_contains")
    return StateContains{j.at("path").get<std::string>(), j.at("member")};
  if (kind == "state_key_value")
    return StateKeyValue{j.at("path").get<std::string>(),
                         j.at("key").get<std::string>(), j.at("expected")};
  if (kind == "min_tool_calls") return MinToolCalls{j.at("n").get<int>()};
  if (kind == "min_successful_tool_calls")
    return MinSuccessfulToolCalls{j.at("n").get<int>()};
  bad_value("criterion kind", kind);
}

Json to_json(const PolicyRule& r) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ForbiddenTool>)
          return Json{{"kind", "forbidden_tool"}, {"tool", v.tool}};
        else if constexpr (std::is_same_v<T, MaxCallsPerTool>)
          return Json{{"kind", "max_calls_per_tool"}, {"tool", v.tool}, {"limit", v.limit}};
        else
          return Json{{"kind", "require_success_before"},
                      {"prerequisite", v.prerequisite},
                      {"gated", v.gated}};
      },
      r);
}

PolicyRule policy_rule_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "forbidden_tool") return ForbiddenTool{j.at("tool").get<std::string>()};
  if (kind == "max_calls_per_tool")
    return MaxCallsPerTool{j.at("tool").get<std::string>(), j.at("limit").get<int>()};
  if (kind == "require_success_before")
    return RequireSuccessBefore{j.at("prerequisite").get<std::string>(),
                                j.at("gated").get<std::string>()};
  bad_value("policy rule kind", kind);
}

Json to_json(const Trigger& t) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TriggerToolName>)
          return Json{{"kind", "tool_name"}, {"name", v.name}};
        else if constexpr (std::is_same_v<T, TriggerNthCall>)
          return Json{{"kind", "nth_call"}, {"n", v.n}};
        else if constexpr (std::is_same_v<T, TriggerArgPattern>)
          return Json{{"kind", "arg_pattern"},
                      {"tool", v.tool},
                      {"param", v.param},
                      {"substring", v.substring}};
        else
          return Json{{"kind", "probabilistic"}, {"p", v.p}};
      },
      t);
}

Trigger trigger_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "tool_name") return TriggerToolName{j.at("name").get<std::string>()};
  if (kind == "nth_call") return TriggerNthCall{j.at("n").get<int>()};
  if (kind == "arg_pattern")
    return TriggerArgPattern{j.at("tool").get<std::string>(),
                             j.at("param").get<std::string>(),
                             j.at("substring").get<std::string>()};
  if (kind == "probabilistic") return TriggerProbabilistic{j.at("p").get<double>()};
  bad_value("trigger kind", kind);
}

Json to_json(const FaultSpec& f) {
  Json behavior = Json::object();
  switch (f.fault_type) {
    case FaultType::kSchemaDrift: {
      Json renames = Json::object();
      for (const auto& [from, to] : f.param_rename_map) renames[from] = to;
      behavior["param_rename_map"] = renames;
      if (f.tool_rename)
        behavior["tool_rename"] =
            Json{{"from", f.tool_rename->first}, {"to", f.tool_rename->second}};
      break;
    }
    case FaultType::kRateLimit:
      behavior["retry_after_steps"] = f.retry_after_steps;
      behavior["recover_after_failures"] = f.recover_after_failures;
      break;
    case FaultType::kTimeout:
      behavior["fail_count_before_recovery"] = f.fail_count_before_recovery;
      break;
    case FaultType::kAuthFailure:
      behavior["persistent"] = f.persistent;
      break;
    case FaultType::kAdversarialRewrite:
      behavior["style"] = to_string(f.style);
      break;
  }
  return Json{{"fault_type", to_string(f.fault_type)},
              {"trigger", to_json(f.trigger)},
              {"behavior", behavior}};
}

FaultSpec fault_spec_from_json(const Json& j) {
  FaultSpec f;
  f.fault_type = fault_type_from_string(j.at("fault_type").get<std::string>());
  f.trigger = trigger_from_json(j.at("trigger"));
  const Json& b = j.at("behavior");
  switch (f.fault_type) {
    case FaultType::kSchemaDrift:
      if (b.contains("param_rename_map"))
        for (const auto& [from, to] : b.at("param_rename_map").items())
          f.param_rename_map[from] = to.get<std::string>();
      if (b.contains("tool_rename"))
        f.tool_rename = {b.at("tool_rename").at("from").get<std::string>(),
                         b.at("tool_rename").at("to").get<std::string>()};
      break;
    case FaultType::kRateLimit:
      f.retry_after_steps = b.at("retry_after_steps").get<int>();
      f.recover_after_failures = b.at("recover_after_failures").get<int>();
      break;
    case FaultType::kTimeout:
      f.fail_count_before_recovery = b.at("fail_count_before_recovery").get<int>();
      break;
    case FaultType::kAuthFailure:
      f.persistent = b.at("persistent").get<bool>();
      break;
    case FaultType::kAdversarialRewrite:
      f.style = rewrite_style_from_string(b.at("style").get<std::string>());
      break;
  }
  return f;
}

Json to_json(const TaskRecord& t) {
  Json tools = Json::array();
  for (const auto& s : t.tool_schemas) tools.push_back(to_json(s));
  Json criteria = Json::array();
  for (const auto& c : t.success_criteria) criteria.push_back(to_json(c));
  Json faults = Json::array();
  for (const auto& f : t.fault_plan) faults.push_back(to_json(f));
  Json rules = Json::array();
  for (const auto& r : t.policy_rules) rules.push_back(to_json(r));
  return Json{{"task_id", t.task_id},
              {"domain", to_string(t.domain)},
              {"instruction", t.instruction},
              {"tool_schemas", tools},
              {"initial_state", t.initial_state},
              {"goal_annotation", t.goal_annotation},
              {"success_criteria", criteria},
              {"fault_plan", faults},
              {"policy_rules", rules},
              {"budgets", to_json(t.budgets)},
              {"seed", t.seed},
              {"version", t.version}};
}

TaskRecord task_record_from_json(const Json& j) {
  TaskRecord t;
  t.task_id = j.at("task_id").get<std::string>();
  t.domain = domain_from_string(j.at("domain").get<std::string>());
  t.instruction = j.at("instruction").get<std::string>();
  for (const auto& s : j.at("tool_schemas"))
    t.tool_schemas.push_back(tool_schema_from_json(s));
  t.initial_state = j.at("initial_state");
  t.goal_annotation = j.at("goal_annotation");
  for (const auto& c : j.at("success_criteria"))
    t.success_criteria.push_back(criterion_from_json(c));
  for (const auto& f : j.at("fault_plan"))
    t.fault_plan.push_back(fault_spec_from_json(f));
  for (const auto& r : j.at("policy_rules"))
    t.policy_rules.push_back(policy_rule_from_json(r));
  t.budgets = budget_from_json(j.at("budgets"));
  t.seed = j.at("seed").get<uint64_t>();
  t.version = j.at("version").get<std::string>();
  return t;
}

const Json* resolve_path(const DomainState& state, const std::string& path) {
  const Json* cur = &state;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (cur->is_object()) {
      auto it = cur->find(part);
      if (it == cur->end()) return nullptr;
      cur = &*it;
    } else if (cur->is_array()) {
      size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (...) {
        return nullptr;
      }
      if (idx >= cur->size()) return nullptr;
      cur = &(*cur)[idx];
    } else {
      return nullptr;
    }
  }
  return cur;
}

}  // namespace toolbench

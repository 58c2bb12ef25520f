#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "toolbench/canonical.hpp"

namespace toolbench {

// A domain state is a JSON tree rooted per domain (record store, document
// corpus, file table, event table). Deep equality and canonical bytes are
// inherited from Json.
using DomainState = Json;

enum class Domain { kCrud, kRetrieval, kFiles, kScheduling };

const char* to_string(Domain d);
Domain domain_from_string(const std::string& s);

enum class ValueKind { kString, kInteger, kNumber, kBoolean, kList, kMap };

const char* to_string(ValueKind k);
ValueKind value_kind_from_string(const std::string& s);

struct ParamSpec {
  std::string name;
  ValueKind value_kind = ValueKind::kString;
  bool required = true;
  std::vector<Json> allowed_values;  // empty = unconstrained
};

struct ToolSchema {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;

  const ParamSpec* find_param(const std::string& param_name) const;
};

struct Budget {
  int max_steps = 1;
  int max_tool_calls = 1;
  int max_retries = 0;
  int per_call_timeout_ms = 1000;  // nominal metadata, never wall-clock enforced
};

// --- success criteria -------------------------------------------------------

struct StateEquals {
  std::string path;
  Json expected;
};
struct StateExists {
  std::string path;
};
struct StateContains {
  std::string path;
  Json member;
};
struct StateKeyValue {
  std::string path;
  std::string key;
  Json expected;
};
struct MinToolCalls {
  int n = 1;
};
struct MinSuccessfulToolCalls {
  int n = 1;
};

using Criterion = std::variant<StateEquals, StateExists, StateContains,
                               StateKeyValue, MinToolCalls,
                               MinSuccessfulToolCalls>;

// --- policy rules -----------------------------------------------------------

struct ForbiddenTool {
  std::string tool;
};
struct MaxCallsPerTool {
  std::string tool;
  int limit = 1;
};
struct RequireSuccessBefore {
  std::string prerequisite;
  std::string gated;
};

using PolicyRule =
    std::variant<ForbiddenTool, MaxCallsPerTool, RequireSuccessBefore>;

// --- fault plan -------------------------------------------------------------

struct TriggerToolName {
  std::string name;
};
struct TriggerNthCall {
  int n = 1;  // 1-based episode call index
};
struct TriggerArgPattern {
  std::string tool;
  std::string param;
  std::string substring;
};
struct TriggerProbabilistic {
  double p = 1.0;
};

using Trigger = std::variant<TriggerToolName, TriggerNthCall,
                             TriggerArgPattern, TriggerProbabilistic>;

enum class FaultType {
  kSchemaDrift,
  kRateLimit,
  kTimeout,
  kAuthFailure,
  kAdversarialRewrite
};

const char* to_string(FaultType t);
FaultType fault_type_from_string(const std::string& s);

enum class RewriteStyle { kMisleadingParam, kWrongToolHint, kVague };

const char* to_string(RewriteStyle s);
RewriteStyle rewrite_style_from_string(const std::string& s);

struct FaultSpec {
  FaultType fault_type = FaultType::kTimeout;
  Trigger trigger;

  // schema_drift
  std::map<std::string, std::string> param_rename_map;
  std::optional<std::pair<std::string, std::string>> tool_rename;

  // rate_limit
  int retry_after_steps = 1;
  int recover_after_failures = 0;  // 0 = persistent

  // timeout
  int fail_count_before_recovery = 0;  // 0 = persistent

  // auth_failure
  bool persistent = true;

  // adversarial_rewrite
  RewriteStyle style = RewriteStyle::kVague;
};

// --- task record ------------------------------------------------------------

struct TaskRecord {
  std::string task_id;
  Domain domain = Domain::kCrud;
  std::string instruction;
  std::vector<ToolSchema> tool_schemas;
  DomainState initial_state;
  Json goal_annotation;  // machine-readable mirror of the instruction
  std::vector<Criterion> success_criteria;
  std::vector<FaultSpec> fault_plan;
  std::vector<PolicyRule> policy_rules;
  Budget budgets;
  uint64_t seed = 0;
  std::string version;

  const ToolSchema* find_tool(const std::string& name) const;
};

// JSON round-trip. to_json emits the canonical field layout used by
// .tasks.jsonl lines.
Json to_json(const ParamSpec&);
Json to_json(const ToolSchema&);
Json to_json(const Budget&);
Json to_json(const Criterion&);
Json to_json(const PolicyRule&);
Json to_json(const Trigger&);
Json to_json(const FaultSpec&);
Json to_json(const TaskRecord&);

ParamSpec param_spec_from_json(const Json&);
ToolSchema tool_schema_from_json(const Json&);
Budget budget_from_json(const Json&);
Criterion criterion_from_json(const Json&);
PolicyRule policy_rule_from_json(const Json&);
Trigger trigger_from_json(const Json&);
FaultSpec fault_spec_from_json(const Json&);
TaskRecord task_record_from_json(const Json&);

// Slash-separated literal key path lookup into a DomainState tree.
// Returns nullptr when the path does not resolve.
const Json* resolve_path(const DomainState& state, const std::string& path);

}  // namespace toolbench

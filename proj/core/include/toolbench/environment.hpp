#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toolbench/task.hpp"

namespace toolbench {

struct ToolCall {
  std::string tool_name;
  std::map<std::string, Json> arguments;
};

enum class ErrorCode {
  kUnknownTool,
  kInvalidArguments,
  kSchemaDrift,
  kRateLimited,
  kTimeout,
  kUnauthorized,
  kPolicyViolation,
  kNotFound,
  kConflict
};

const char* to_string(ErrorCode c);
ErrorCode error_code_from_string(const std::string& s);

struct FaultContext {
  FaultType fault_type = FaultType::kTimeout;
  int fault_index = 0;  // index into the task's fault_plan
  std::string trigger;  // human-readable trigger description
};

struct ErrorPayload {
  ErrorCode code = ErrorCode::kInvalidArguments;
  std::string message;
  std::vector<std::string> unknown_params;
  std::vector<std::string> missing_params;
  std::optional<int> retry_after_steps;
  std::optional<FaultContext> fault_context;
};

struct ToolResult {
  bool ok = false;
  Json value;  // set when ok
  ErrorPayload error;  // set when !ok

  static ToolResult success(Json value);
  static ToolResult failure(ErrorPayload error);
};

Json to_json(const FaultContext&);
Json to_json(const ErrorPayload&);
Json to_json(const ToolResult&);
Json to_json(const ToolCall&);
FaultContext fault_context_from_json(const Json&);
ErrorPayload error_payload_from_json(const Json&);
ToolResult tool_result_from_json(const Json&);
ToolCall tool_call_from_json(const Json&);

// One deterministic simulator instance, confined to a single episode.
// live_state only changes through successful executions.
class Environment {
 public:
  explicit Environment(const TaskRecord& task);

  // Schema validation against the effective (possibly drifted) schemas.
  // Returns nullopt when the call is well formed.
  std::optional<ErrorPayload> validate_call(const ToolCall& call) const;

  // Deterministic tool semantics. Precondition: validate_call passed.
  ToolResult execute(const ToolCall& call);

  const DomainState& live_state() const { return state_; }
  const std::vector<ToolSchema>& effective_schemas() const { return schemas_; }
  std::vector<ToolSchema>& mutable_schemas() { return schemas_; }
  const std::vector<std::pair<ToolCall, ToolResult>>& call_log() const {
    return log_;
  }
  Domain domain() const { return domain_; }

  std::string state_digest() const;

 private:
  ToolResult execute_crud(const ToolCall& call);
  ToolResult execute_retrieval(const ToolCall& call);
  ToolResult execute_files(const ToolCall& call);
  ToolResult execute_scheduling(const ToolCall& call);

  Domain domain_;
  DomainState state_;
  std::vector<ToolSchema> schemas_;
  std::vector<std::pair<ToolCall, ToolResult>> log_;
};

// Token-overlap ranking used by the retrieval simulator; exposed for tests.
// Returns document ids sorted by descending overlap with the query tokens,
// ties broken by ascending id. Documents with zero overlap are excluded.
std::vector<std::string> rank_documents(const Json& documents,
                                        const std::string& query);

}  // namespace toolbench

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toolbench/environment.hpp"
#include "toolbench/stream.hpp"
#include "toolbench/task.hpp"

namespace toolbench {

// Per-episode fault state. Mutates only through the intercept path, so a
// replay of the same call sequence reproduces the same state trajectory.
class FaultRuntime {
 public:
  explicit FaultRuntime(const TaskRecord& task);

  // Applies every schema_drift spec with a ToolName trigger to the effective
  // schemas. Interface drift is static for the episode; call once at start.
  void apply_static_drift(Environment& env);

  // Families auth_failure, rate_limit, timeout in fixed order; at most one
  // injects per call. Dynamic drift triggers (NthCall / ArgPattern /
  // Probabilistic) mutate the schemas at their first firing. call_index is
  // the 1-based episode call counter.
  std::optional<ErrorPayload> intercept(Environment& env, const ToolCall& call,
                                        int call_index);

  // Attaches drift fault context to a validation failure the drifted schema
  // explains. Returns the payload unchanged otherwise.
  ErrorPayload annotate_drift_failure(ErrorPayload payload,
                                      const ToolCall& call,
                                      const Environment& env);

  // Family 5: adversarial post-error transformation of the agent-visible
  // payload. The trace keeps code and fault context either way.
  ErrorPayload rewrite_error(const ErrorPayload& payload, const ToolCall& call,
                             const Environment& env, int call_index);

  // Maps a call expressed in drifted names back to the simulator's original
  // tool and param names. Identity when no applied drift covers the call.
  ToolCall normalize_call(const ToolCall& call) const;

  // True when the last rewrite_error call actually transformed the payload;
  // carries the responsible spec's context for the trace.
  std::optional<FaultContext> last_rewrite_context() const {
    return last_rewrite_context_;
  }

 private:
  struct PerFault {
    int evaluations = 0;
    int injections = 0;
    int cooldown_until_call = 0;  // rate limit: next call index allowed
    bool recovered = false;
    bool drift_applied = false;
    std::string drift_target;  // tool the drift spec mutated
    std::optional<SeededStream> stream;  // probabilistic triggers only
  };

  bool trigger_fires(size_t index, const ToolCall& call, int call_index);
  void apply_drift_spec(const FaultSpec& spec, Environment& env,
                        const std::string& fallback_tool);

  const TaskRecord& task_;
  std::vector<PerFault> state_;
  std::optional<FaultContext> last_rewrite_context_;
};

std::string describe_trigger(const Trigger& trigger);

}  // namespace toolbench

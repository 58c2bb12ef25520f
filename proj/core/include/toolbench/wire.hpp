#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "toolbench/agent.hpp"

namespace toolbench {

// Line-delimited JSON messages over a subprocess's stdin/stdout:
//   {"type":"reset", task_id, instruction, tool_schemas, budgets,
//    goal_annotation}                          -> {"type":"ready"}
//   {"type":"observe", step, remaining, last_result}
//      -> {"type":"act","action":{"call":{"tool","arguments"}}}
//       | {"type":"act","action":"finish"}
// Unknown fields are ignored. Malformed or late replies raise
// AgentProtocolError; the runner scores them as catastrophic.

Json reset_message(const ResetInfo& info);
Json observe_message(const Observation& obs);
// Parses an act reply. Throws AgentProtocolError on malformed input.
AgentAction parse_act_message(const Json& message);
Json act_message(const AgentAction& action);

// Spawns `command` and speaks the wire protocol with it. The subprocess
// lives across episodes; each reset starts a new one. Spawn failure throws
// std::runtime_error before any episode starts.
std::unique_ptr<Agent> spawn_external_agent(
    const std::vector<std::string>& command, int reply_deadline_ms = 30000);

// Serves an in-process agent over the wire protocol (stdin/stdout loop of
// the `agent` CLI subcommand). Returns at end of input.
void serve_agent(Agent& agent, std::istream& in, std::ostream& out);

}  // namespace toolbench

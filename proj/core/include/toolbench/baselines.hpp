#pragma once

#include <memory>
#include <string>
#include <vector>

#include "toolbench/agent.hpp"

namespace toolbench {

// Built-in deterministic agents. Valid names: heuristic, schema_repair,
// policy_aware.
std::unique_ptr<Agent> make_baseline(const std::string& name);

std::vector<std::string> baseline_names();

// Levenshtein distance; exposed for the repair pairing tests.
size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace toolbench

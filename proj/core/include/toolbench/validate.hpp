#pragma once

#include <string>
#include <vector>

#include "toolbench/task.hpp"

namespace toolbench {

struct ValidationError {
  std::string rule;   // stable rule identifier, e.g. "fault_tool_reference"
  std::string field;  // offending field
  std::string message;
};

// Structural validation per the generator's abort-on-invalid contract.
// Pure: same record, same error list. Empty list means the record is valid.
std::vector<ValidationError> validate_task(const TaskRecord& record);

}  // namespace toolbench

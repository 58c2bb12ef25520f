#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolbench/runner.hpp"
#include "toolbench/task.hpp"

namespace toolbench {

// Conjunction over all criteria against the current state and transcript
// counters. Unresolvable paths make their criterion false, never an error.
bool check_criteria(const DomainState& state, int tool_calls,
                    int successful_tool_calls,
                    const std::vector<Criterion>& criteria);

struct TaskMetrics {
  bool task_success = false;
  int tool_calls_used = 0;
  int invalid_calls = 0;
  int policy_violations = 0;
  bool fault_affected = false;
  bool recovery_success = false;               // defined when fault_affected
  std::optional<int> time_to_recovery;         // steps, >= 1 when present
  bool budget_exceeded = false;
  bool catastrophic = false;
};

Json to_json(const TaskMetrics&);
TaskMetrics task_metrics_from_json(const Json&);

// Pure function of (trace, task). Throws on task_id mismatch.
TaskMetrics score_task(const EpisodeTrace& trace, const TaskRecord& task);

// S(k): fraction of tasks solved with at most k tool calls.
double budgeted_success(const std::vector<TaskMetrics>& metrics, int k);

struct ReportSlice {
  int n = 0;
  int fault_affected_n = 0;
  double success_rate = 0.0;
  double recovery_rate = 0.0;  // over fault-affected tasks in the slice
  double mean_tool_calls = 0.0;
  double policy_violation_rate = 0.0;
};

struct AggregateReport {
  int n = 0;
  double success_rate = 0.0;
  double mean_policy_violations = 0.0;
  double invalid_call_rate = 0.0;  // micro: total invalid / total calls
  double recovery_rate = 0.0;      // over fault-affected tasks
  std::optional<double> mean_time_to_recovery;  // over recovered tasks
  double mean_tool_calls = 0.0;
  double budget_exceeded_rate = 0.0;
  double catastrophic_rate = 0.0;
  std::map<int, double> budgeted;  // S(k) for k in {4, 8, 16, 32}
  double auc = 0.0;                // mean of the four S(k)
  std::map<std::string, ReportSlice> per_domain;
  std::map<std::string, ReportSlice> per_fault;  // keyed by family, "none" incl.
};

Json to_json(const AggregateReport&);

static constexpr int kBudgetCaps[] = {4, 8, 16, 32};

AggregateReport aggregate(const std::vector<TaskMetrics>& metrics,
                          const std::vector<TaskRecord>& tasks);

// Fault family a task was assigned by the generator ("none" when the fault
// plan is empty).
std::string task_fault_family(const TaskRecord& task);

// Aligned text tables mirroring the overall and per-fault report layouts.
std::string render_overall_table(
    const std::vector<std::pair<std::string, AggregateReport>>& rows);
std::string render_fault_table(
    const std::vector<std::pair<std::string, AggregateReport>>& rows);

// (k, S(k)) pairs as comma-separated lines.
std::string figure_data(const AggregateReport& report);

}  // namespace toolbench

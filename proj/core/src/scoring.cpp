#include "toolbench/scoring.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace toolbench {

bool check_criteria(const DomainState& state, int tool_calls,
                    int successful_tool_calls,
                    const std::vector<Criterion>& criteria) {
  for (const auto& c : criteria) {
    const bool holds = std::visit(
        [&](const auto& v) -> bool {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, StateEquals>) {
            const Json* at = resolve_path(state, v.path);
            return at && *at == v.expected;
          } else if constexpr (std::is_same_v<T, StateExists>) {
            return resolve_path(state, v.path) != nullptr;
          } else if constexpr (std::is_same_v<T, StateContains>) {
            const Json* at = resolve_path(state, v.path);
            if (!at) return false;
            if (at->is_array())
              return std::find(at->begin(), at->end(), v.member) != at->end();
            if (at->is_object()) {
              for (const auto& [k, val] : at->items())
                if (val == v.member) return true;
              return false;
            }
            return false;
          } else if constexpr (std::is_same_v<T, StateKeyValue>) {
            const Json* at = resolve_path(state, v.path);
            return at && at->is_object() && at->contains(v.key) &&
                   at->at(v.key) == v.expected;
          } else if constexpr (std::is_same_v<T, MinToolCalls>) {
            return tool_calls >= v.n;
          } else {
            return successful_tool_calls >= v.n;
          }
        },
        c);
    if (!holds) return false;
  }
  return true;
}

Json to_json(const TaskMetrics& m) {
  Json j{{"task_success", m.task_success},
         {"tool_calls_used", m.tool_calls_used},
         {"invalid_calls", m.invalid_calls},
         {"policy_violations", m.policy_violations},
         {"fault_affected", m.fault_affected},
         {"budget_exceeded", m.budget_exceeded},
         {"catastrophic", m.catastrophic}};
  if (m.fault_affected) {
    j["recovery_success"] = m.recovery_success;
    if (m.time_to_recovery) j["time_to_recovery"] = *m.time_to_recovery;
  }
  return j;
}

TaskMetrics task_metrics_from_json(const Json& j) {
  TaskMetrics m;
  m.task_success = j.at("task_success").get<bool>();
  m.tool_calls_used = j.at("tool_calls_used").get<int>();
  m.invalid_calls = j.at("invalid_calls").get<int>();
  m.policy_violations = j.at("policy_violations").get<int>();
  m.fault_affected = j.at("fault_affected").get<bool>();
  m.budget_exceeded = j.at("budget_exceeded").get<bool>();
  m.catastrophic = j.at("catastrophic").get<bool>();
  if (j.contains("recovery_success"))
    m.recovery_success = j.at("recovery_success").get<bool>();
  if (j.contains("time_to_recovery"))
    m.time_to_recovery = j.at("time_to_recovery").get<int>();
  return m;
}

TaskMetrics score_task(const EpisodeTrace& trace, const TaskRecord& task) {
  if (trace.task_id != task.task_id)
    throw std::invalid_argument("score_task: trace/task mismatch");

  TaskMetrics m;
  m.task_success = trace.termination == Termination::kSuccess;
  m.tool_calls_used = trace.tool_calls_used;
  m.policy_violations = trace.policy_violations;
  m.budget_exceeded = trace.termination == Termination::kBudgetSteps ||
                      trace.termination == Termination::kBudgetCalls;
  m.catastrophic = trace.termination == Termination::kRetryOverflow ||
                   trace.termination == Termination::kAgentProtocolError;

  // First fault-context failure, then a later ok result for the same tool.
  int first_fault_step = 0;
  std::string faulted_tool;
  for (const auto& step : trace.steps) {
    if (step.action.finish || !step.result) continue;
    if (!step.result->ok) {
      const ErrorCode code = step.result->error.code;
      if (code == ErrorCode::kUnknownTool || code == ErrorCode::kInvalidArguments)
        ++m.invalid_calls;
    }
    if (step.fault_context) {
      m.fault_affected = true;
      if (first_fault_step == 0 && !step.result->ok) {
        first_fault_step = step.step;
        faulted_tool = step.action.call.tool_name;
      }
    }
    if (first_fault_step > 0 && step.step > first_fault_step &&
        step.result->ok && step.action.call.tool_name == faulted_tool &&
        !m.recovery_success) {
      m.recovery_success = true;
      m.time_to_recovery = step.step - first_fault_step;
    }
  }
  return m;
}

double budgeted_success(const std::vector<TaskMetrics>& metrics, int k) {
  if (metrics.empty())
    throw std::invalid_argument("budgeted_success: empty metric list");
  if (k < 1) throw std::invalid_argument("budgeted_success: cap must be >= 1");
  int hits = 0;
  for (const auto& m : metrics)
    if (m.task_success && m.tool_calls_used <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(metrics.size());
}

std::string task_fault_family(const TaskRecord& task) {
  if (task.fault_plan.empty()) return "none";
  return to_string(task.fault_plan.front().fault_type);
}

namespace {

ReportSlice make_slice(const std::vector<const TaskMetrics*>& ms) {
  ReportSlice s;
  s.n = static_cast<int>(ms.size());
  if (ms.empty()) return s;
  int successes = 0, affected = 0, recovered = 0, violations = 0;
  long calls = 0;
  for (const auto* m : ms) {
    successes += m->task_success;
    calls += m->tool_calls_used;
    violations += m->policy_violations;
    if (m->fault_affected) {
      ++affected;
      recovered += m->recovery_success;
    }
  }
  s.fault_affected_n = affected;
  s.success_rate = static_cast<double>(successes) / s.n;
  s.mean_tool_calls = static_cast<double>(calls) / s.n;
  s.policy_violation_rate = static_cast<double>(violations) / s.n;
  s.recovery_rate = affected > 0 ? static_cast<double>(recovered) / affected : 0.0;
  return s;
}

Json to_json(const ReportSlice& s) {
  return Json{{"n", s.n},
              {"fault_affected_n", s.fault_affected_n},
              {"success_rate", s.success_rate},
              {"recovery_rate", s.recovery_rate},
              {"mean_tool_calls", s.mean_tool_calls},
              {"policy_violation_rate", s.policy_violation_rate}};
}

}  // namespace

AggregateReport aggregate(const std::vector<TaskMetrics>& metrics,
                          const std::vector<TaskRecord>& tasks) {
  if (metrics.size() != tasks.size())
    throw std::invalid_argument("aggregate: metric/task length mismatch");
  if (metrics.empty()) throw std::invalid_argument("aggregate: empty input");

  AggregateReport r;
  r.n = static_cast<int>(metrics.size());

  long total_calls = 0, total_invalid = 0, total_violations = 0;
  int successes = 0, affected = 0, recovered = 0, exceeded = 0, catastrophic = 0;
  long ttr_sum = 0;
  int ttr_n = 0;
  for (const auto& m : metrics) {
    successes += m.task_success;
    total_calls += m.tool_calls_used;
    total_invalid += m.invalid_calls;
    total_violations += m.policy_violations;
    exceeded += m.budget_exceeded;
    catastrophic += m.catastrophic;
    if (m.fault_affected) {
      ++affected;
      if (m.recovery_success) {
        ++recovered;
        if (m.time_to_recovery) {
          ttr_sum += *m.time_to_recovery;
          ++ttr_n;
        }
      }
    }
  }
  r.success_rate = static_cast<double>(successes) / r.n;
  r.mean_policy_violations = static_cast<double>(total_violations) / r.n;
  r.invalid_call_rate =
      total_calls > 0 ? static_cast<double>(total_invalid) / total_calls : 0.0;
  r.recovery_rate = affected > 0 ? static_cast<double>(recovered) / affected : 0.0;
  if (ttr_n > 0) r.mean_time_to_recovery = static_cast<double>(ttr_sum) / ttr_n;
  r.mean_tool_calls = static_cast<double>(total_calls) / r.n;
  r.budget_exceeded_rate = static_cast<double>(exceeded) / r.n;
  r.catastrophic_rate = static_cast<double>(catastrophic) / r.n;

  double auc_sum = 0.0;
  for (int k : kBudgetCaps) {
    r.budgeted[k] = budgeted_success(metrics, k);
    auc_sum += r.budgeted[k];
  }
  r.auc = auc_sum / 4.0;

  std::map<std::string, std::vector<const TaskMetrics*>> by_domain, by_fault;
  for (size_t i = 0; i < tasks.size(); ++i) {
    by_domain[to_string(tasks[i].domain)].push_back(&metrics[i]);
    by_fault[task_fault_family(tasks[i])].push_back(&metrics[i]);
  }
  for (const auto& [key, ms] : by_domain) r.per_domain[key] = make_slice(ms);
  for (const auto& [key, ms] : by_fault) r.per_fault[key] = make_slice(ms);
  return r;
}

Json to_json(const AggregateReport& r) {
  Json budgeted = Json::object();
  for (const auto& [k, v] : r.budgeted) budgeted[std::to_string(k)] = v;
  Json domains = Json::object();
  for (const auto& [k, v] : r.per_domain) domains[k] = to_json(v);
  Json faults = Json::object();
  for (const auto& [k, v] : r.per_fault) faults[k] = to_json(v);
  Json j{{"n", r.n},
         {"success_rate", r.success_rate},
         {"mean_policy_violations", r.mean_policy_violations},
         {"invalid_call_rate", r.invalid_call_rate},
         {"recovery_rate", r.recovery_rate},
         {"mean_tool_calls", r.mean_tool_calls},
         {"budget_exceeded_rate", r.budget_exceeded_rate},
         {"catastrophic_rate", r.catastrophic_rate},
         {"budgeted_success", budgeted},
         {"auc", r.auc},
         {"per_domain", domains},
         {"per_fault", faults}};
  if (r.mean_time_to_recovery) j["mean_time_to_recovery"] = *r.mean_time_to_recovery;
  return j;
}

namespace {

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void append_row(std::string& out, const std::vector<std::string>& cells,
                const std::vector<size_t>& widths) {
  for (size_t i = 0; i < cells.size(); ++i) {
    out += cells[i];
    if (i + 1 < cells.size())
      out += std::string(widths[i] - cells[i].size() + 2, ' ');
  }
  out += '\n';
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (size_t i = 0; i < row.size(); ++i)
      widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) append_row(out, row, widths);
  return out;
}

double fault_metric(const AggregateReport& r, const std::string& family,
                    bool recovery) {
  auto it = r.per_fault.find(family);
  if (it == r.per_fault.end()) return 0.0;
  return recovery ? it->second.recovery_rate : it->second.success_rate;
}

}  // namespace

std::string render_overall_table(
    const std::vector<std::pair<std::string, AggregateReport>>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Agent", "Success", "Violations", "Recovery", "Calls"});
  for (const auto& [name, r] : rows)
    cells.push_back({name, fixed(r.success_rate), fixed(r.mean_policy_violations),
                     fixed(r.recovery_rate), fixed(r.mean_tool_calls, 2)});
  return render_table(cells);
}

std::string render_fault_table(
    const std::vector<std::pair<std::string, AggregateReport>>& rows) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Setting"};
  for (const auto& [name, r] : rows) header.push_back(name);
  cells.push_back(header);

  const std::pair<std::string, std::string> settings[] = {
      {"timeout", "Timeout"}, {"schema_drift", "Schema drift"}};
  for (const auto& [family, label] : settings) {
    for (bool recovery : {false, true}) {
      std::vector<std::string> row{label + (recovery ? " recovery" : " success")};
      for (const auto& [name, r] : rows)
        row.push_back(fixed(fault_metric(r, family, recovery)));
      cells.push_back(row);
    }
  }
  for (const auto& [family, label] :
       {std::pair<std::string, std::string>{"auth_failure", "Authz"},
        std::pair<std::string, std::string>{"rate_limit", "Rate limit"}}) {
    std::vector<std::string> row{label + " success"};
    for (const auto& [name, r] : rows)
      row.push_back(fixed(fault_metric(r, family, false)));
    cells.push_back(row);
  }
  return render_table(cells);
}

std::string figure_data(const AggregateReport& report) {
  std::string out = "k,s_k\n";
  for (const auto& [k, v] : report.budgeted)
    out += std::to_string(k) + "," + fixed(v, 6) + "\n";
  return out;
}

}  // namespace toolbench

#include "toolbench/baselines.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace toolbench {

size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

struct PlanStep {
  std::string tool;
  std::map<std::string, Json> args;
  bool optional = false;
};

std::vector<PlanStep> parse_plan(const Json& goal_annotation) {
  std::vector<PlanStep> plan;
  if (!goal_annotation.is_object() || !goal_annotation.contains("plan"))
    return plan;
  for (const auto& step : goal_annotation.at("plan")) {
    PlanStep p;
    p.tool = step.at("tool").get<std::string>();
    for (const auto& [k, v] : step.at("args").items()) p.args[k] = v;
    p.optional = step.value("optional", false);
    plan.push_back(std::move(p));
  }
  return plan;
}

// Emits its bound plan in order; abandons on the first error result.
class HeuristicAgent : public Agent {
 public:
  void reset(const ResetInfo& info) override {
    plan_ = parse_plan(info.goal_annotation);
    next_ = 0;
  }

  AgentAction act(const Observation& obs) override {
    if (obs.last_result && !obs.last_result->ok) return AgentAction::make_finish();
    if (next_ >= plan_.size()) return AgentAction::make_finish();
    const PlanStep& step = plan_[next_++];
    return AgentAction::make_call(ToolCall{step.tool, step.args});
  }

 private:
  std::vector<PlanStep> plan_;
  size_t next_ = 0;
};

// Heuristic plus argument repair from structured error hints and retries
// for transient availability errors.
class RepairAgent : public Agent {
 public:
  void reset(const ResetInfo& info) override {
    plan_ = parse_plan(info.goal_annotation);
    max_retries_ = info.budgets.max_retries;
    next_ = 0;
    self_retries_ = 0;
    repaired_current_ = false;
    last_call_.reset();
  }

  AgentAction act(const Observation& obs) override {
    if (!obs.last_result) return advance();
    if (obs.last_result->ok) {
      repaired_current_ = false;
      return advance();
    }

    const ErrorPayload& e = obs.last_result->error;
    if ((e.code == ErrorCode::kTimeout || e.code == ErrorCode::kRateLimited) &&
        last_call_ && retry_allowed(last_call_->tool_name)) {
      ++self_retries_;
      return AgentAction::make_call(*last_call_);
    }
    if ((e.code == ErrorCode::kInvalidArguments ||
         e.code == ErrorCode::kSchemaDrift) &&
        !e.missing_params.empty() && !e.unknown_params.empty() &&
        !repaired_current_ && last_call_ && retry_allowed(last_call_->tool_name)) {
      ToolCall repaired = rebuild(*last_call_, e);
      if (repaired.arguments != last_call_->arguments) {
        repaired_current_ = true;
        ++self_retries_;
        last_call_ = repaired;
        return AgentAction::make_call(repaired);
      }
    }
    // No usable hints (unauthorized, unknown tool, vague feedback): abandon.
    return AgentAction::make_finish();
  }

 protected:
  virtual bool retry_allowed(const std::string& tool) const {
    (void)tool;
    return self_retries_ + 1 <= max_retries_;
  }

  AgentAction advance() {
    if (next_ >= plan_.size()) return AgentAction::make_finish();
    const PlanStep& step = plan_[next_++];
    last_call_ = ToolCall{step.tool, step.args};
    return AgentAction::make_call(*last_call_);
  }

  // Pair each missing param with the unknown param at minimum edit
  // distance, ties to the earlier hint, and move its value across.
  static ToolCall rebuild(const ToolCall& call, const ErrorPayload& e) {
    ToolCall out = call;
    std::vector<std::string> unknowns = e.unknown_params;
    for (const auto& missing : e.missing_params) {
      size_t best = unknowns.size();
      size_t best_dist = 0;
      for (size_t i = 0; i < unknowns.size(); ++i) {
        const size_t d = edit_distance(missing, unknowns[i]);
        if (best == unknowns.size() || d < best_dist) {
          best = i;
          best_dist = d;
        }
      }
      if (best == unknowns.size()) break;
      auto it = out.arguments.find(unknowns[best]);
      if (it != out.arguments.end()) {
        out.arguments[missing] = it->second;
        out.arguments.erase(it);
      }
      unknowns.erase(unknowns.begin() + best);
    }
    return out;
  }

  std::vector<PlanStep> plan_;
  int max_retries_ = 0;
  size_t next_ = 0;
  int self_retries_ = 0;
  bool repaired_current_ = false;
  std::optional<ToolCall> last_call_;
};

// Repair plus rule awareness: skips forbidden steps, caps per-tool call
// counts, and reorders to satisfy success prerequisites.
class PolicyAwareAgent : public RepairAgent {
 public:
  void reset(const ResetInfo& info) override {
    RepairAgent::reset(info);
    calls_per_tool_.clear();
    forbidden_.clear();
    limits_.clear();

    std::vector<std::pair<std::string, std::string>> prereqs;
    if (info.goal_annotation.is_object() &&
        info.goal_annotation.contains("policy_rules")) {
      for (const auto& rule : info.goal_annotation.at("policy_rules")) {
        const auto kind = rule.at("kind").get<std::string>();
        if (kind == "forbidden_tool") {
          forbidden_.push_back(rule.at("tool").get<std::string>());
        } else if (kind == "max_calls_per_tool") {
          limits_[rule.at("tool").get<std::string>()] = rule.at("limit").get<int>();
        } else if (kind == "require_success_before") {
          prereqs.emplace_back(rule.at("prerequisite").get<std::string>(),
                               rule.at("gated").get<std::string>());
        }
      }
    }

    auto& plan = plan_;
    plan.erase(std::remove_if(plan.begin(), plan.end(),
                              [&](const PlanStep& s) {
                                return std::find(forbidden_.begin(), forbidden_.end(),
                                                 s.tool) != forbidden_.end();
                              }),
               plan.end());

    for (const auto& [pre, gated] : prereqs) {
      auto pre_it = std::find_if(plan.begin(), plan.end(),
                                 [&](const PlanStep& s) { return s.tool == pre; });
      auto gated_it = std::find_if(plan.begin(), plan.end(),
                                   [&](const PlanStep& s) { return s.tool == gated; });
      if (pre_it != plan.end() && gated_it != plan.end() && gated_it < pre_it) {
        PlanStep moved = *gated_it;
        plan.erase(gated_it);
        pre_it = std::find_if(plan.begin(), plan.end(),
                              [&](const PlanStep& s) { return s.tool == pre; });
        plan.insert(pre_it + 1, moved);
      }
    }
  }

  AgentAction act(const Observation& obs) override {
    AgentAction action = RepairAgent::act(obs);
    if (!action.finish) calls_per_tool_[action.call.tool_name] += 1;
    return action;
  }

 protected:
  bool retry_allowed(const std::string& tool) const override {
    if (!RepairAgent::retry_allowed(tool)) return false;
    auto limit = limits_.find(tool);
    if (limit != limits_.end()) {
      auto used = calls_per_tool_.find(tool);
      const int prior = used == calls_per_tool_.end() ? 0 : used->second;
      if (prior + 1 > limit->second) return false;
    }
    return true;
  }

 private:
  std::map<std::string, int> calls_per_tool_;
  std::vector<std::string> forbidden_;
  std::map<std::string, int> limits_;
};

}  // namespace

std::unique_ptr<Agent> make_baseline(const std::string& name) {
  if (name == "heuristic") return std::make_unique<HeuristicAgent>();
  if (name == "schema_repair") return std::make_unique<RepairAgent>();
  if (name == "policy_aware") return std::make_unique<PolicyAwareAgent>();
  throw std::invalid_argument("unknown baseline '" + name + "'");
}

std::vector<std::string> baseline_names() {
  return {"heuristic", "schema_repair", "policy_aware"};
}

}  // namespace toolbench

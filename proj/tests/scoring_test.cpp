#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "toolbench/runner.hpp"
#include "toolbench/scoring.hpp"
#include "toolbench/stream.hpp"

using namespace toolbench;
using namespace toolbench::testing;

namespace {

std::vector<TaskMetrics> random_metrics(SeededStream& s, size_t n) {
  std::vector<TaskMetrics> out(n);
  for (auto& m : out) {
    m.task_success = s.next_below(2) == 0;
    m.tool_calls_used = static_cast<int>(s.next_below(40));
    m.invalid_calls = static_cast<int>(s.next_below(4));
    m.fault_affected = s.next_below(2) == 0;
    if (m.fault_affected && s.next_below(2) == 0) {
      m.recovery_success = true;
      m.time_to_recovery = 1 + static_cast<int>(s.next_below(5));
    }
  }
  return out;
}

// Independent oracle: criterion checked by a hand-rolled recursive walk
// over a parallel tree representation, no resolve_path involved.
const Json* walk(const Json& node, const std::vector<std::string>& keys,
                 size_t at) {
  if (at == keys.size()) return &node;
  if (node.is_object()) {
    auto it = node.find(keys[at]);
    if (it == node.end()) return nullptr;
    return walk(*it, keys, at + 1);
  }
  if (node.is_array()) {
    size_t idx = 0;
    for (char ch : keys[at]) {
      if (ch < '0' || ch > '9') return nullptr;
      idx = idx * 10 + (ch - '0');
    }
    if (keys[at].empty() || idx >= node.size()) return nullptr;
    return walk(node[idx], keys, at + 1);
  }
  return nullptr;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> keys;
  std::string cur;
  for (char ch : path) {
    if (ch == '/') {
      keys.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  keys.push_back(cur);
  return keys;
}

bool oracle_one(const Json& state, int calls, int ok_calls, const Criterion& c) {
  if (const auto* v = std::get_if<StateEquals>(&c)) {
    const Json* at = walk(state, split_path(v->path), 0);
    return at != nullptr && *at == v->expected;
  }
  if (const auto* v = std::get_if<StateExists>(&c))
    return walk(state, split_path(v->path), 0) != nullptr;
  if (const auto* v = std::get_if<StateContains>(&c)) {
    const Json* at = walk(state, split_path(v->path), 0);
    if (!at) return false;
    if (at->is_array()) {
      for (const auto& m : *at)
        if (m == v->member) return true;
      return false;
    }
    if (at->is_object()) {
      for (const auto& [k, m] : at->items())
        if (m == v->member) return true;
    }
    return false;
  }
  if (const auto* v = std::get_if<StateKeyValue>(&c)) {
    const Json* at = walk(state, split_path(v->path), 0);
    return at != nullptr && at->is_object() && at->contains(v->key) &&
           at->at(v->key) == v->expected;
  }
  if (const auto* v = std::get_if<MinToolCalls>(&c)) return calls >= v->n;
  return ok_calls >= std::get<MinSuccessfulToolCalls>(c).n;
}

Json random_state(SeededStream& s) {
  Json root = Json::object();
  const uint64_t n = s.next_below(4);
  for (uint64_t i = 0; i < n; ++i) {
    const std::string key = "k" + std::to_string(s.next_below(4));
    switch (s.next_below(4)) {
      case 0: root[key] = static_cast<int>(s.next_below(5)); break;
      case 1: root[key] = "v" + std::to_string(s.next_below(3)); break;
      case 2: {
        Json arr = Json::array();
        const uint64_t len = s.next_below(3);
        for (uint64_t j = 0; j < len; ++j)
          arr.push_back("v" + std::to_string(s.next_below(3)));
        root[key] = arr;
        break;
      }
      default: {
        Json inner = Json::object();
        const uint64_t len = s.next_below(3);
        for (uint64_t j = 0; j < len; ++j)
          inner["n" + std::to_string(j)] = static_cast<int>(s.next_below(5));
        root[key] = inner;
        break;
      }
    }
  }
  return root;
}

Criterion random_criterion(SeededStream& s) {
  std::string path = "k" + std::to_string(s.next_below(4));
  if (s.next_below(3) == 0) {
    path += s.next_below(2) == 0 ? "/n0" : "/" + std::to_string(s.next_below(3));
  }
  switch (s.next_below(6)) {
    case 0: return StateEquals{path, Json(static_cast<int>(s.next_below(5)))};
    case 1: return StateExists{path};
    case 2: return StateContains{path, Json("v" + std::to_string(s.next_below(3)))};
    case 3:
      return StateKeyValue{path, "n" + std::to_string(s.next_below(3)),
                           Json(static_cast<int>(s.next_below(5)))};
    case 4: return MinToolCalls{static_cast<int>(1 + s.next_below(5))};
    default: return MinSuccessfulToolCalls{static_cast<int>(1 + s.next_below(5))};
  }
}

}  // namespace

TEST_CASE("budgeted success matches brute force on random inputs") {
  SeededStream s(101, "sk-prop");
  for (int round = 0; round < 1000; ++round) {
    const auto metrics = random_metrics(s, 1 + s.next_below(30));
    const int k = 1 + static_cast<int>(s.next_below(40));
    int hits = 0;
    for (const auto& m : metrics)
      if (m.task_success && m.tool_calls_used <= k) ++hits;
    const double want = static_cast<double>(hits) / metrics.size();
    CHECK(budgeted_success(metrics, k) == want);
  }
}

TEST_CASE("S(k) is non-decreasing and AUC is the mean of the four caps") {
  SeededStream s(102, "sk-mono");
  for (int round = 0; round < 200; ++round) {
    const auto metrics = random_metrics(s, 1 + s.next_below(50));
    double prev = -1.0;
    double sum = 0.0;
    for (int k : kBudgetCaps) {
      const double sk = budgeted_success(metrics, k);
      CHECK(sk >= prev);
      prev = sk;
      sum += sk;
    }
    const auto report =
        aggregate(metrics, std::vector<TaskRecord>(metrics.size(), crud_task()));
    CHECK(std::fabs(report.auc - sum / 4.0) < 1e-12);
  }
}

TEST_CASE("budgeted success rejects degenerate inputs") {
  CHECK_THROWS(budgeted_success({}, 4));
  SeededStream s(1, "degenerate");
  CHECK_THROWS(budgeted_success(random_metrics(s, 3), 0));
}

TEST_CASE("criteria checker matches an independent recursive oracle") {
  SeededStream s(103, "crit-prop");
  int mismatches = 0;
  for (int round = 0; round < 10000; ++round) {
    const Json state = random_state(s);
    const int calls = static_cast<int>(s.next_below(6));
    const int ok_calls = static_cast<int>(s.next_below(calls + 1));
    std::vector<Criterion> criteria;
    const uint64_t n = 1 + s.next_below(3);
    for (uint64_t i = 0; i < n; ++i) criteria.push_back(random_criterion(s));

    bool want = true;
    for (const auto& c : criteria)
      want = want && oracle_one(state, calls, ok_calls, c);
    if (check_criteria(state, calls, ok_calls, criteria) != want) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("score_task reads recovery and time_to_recovery off the trace") {
  TaskRecord t = crud_task();
  FaultSpec f;
  f.fault_type = FaultType::kTimeout;
  f.trigger = TriggerToolName{"create_record"};
  f.fail_count_before_recovery = 1;
  t.fault_plan = {f};

  const AgentAction create = call(
      "create_record", {{"id", "r1"}, {"fields", Json{{"status", "open"}}}});
  SequenceAgent agent({create, create});
  const EpisodeTrace trace = run_episode(t, agent);
  REQUIRE(trace.termination == Termination::kSuccess);

  const TaskMetrics m = score_task(trace, t);
  CHECK(m.task_success);
  CHECK(m.fault_affected);
  CHECK(m.recovery_success);
  CHECK(m.time_to_recovery == 1);
  CHECK(m.tool_calls_used == 2);
  CHECK(m.invalid_calls == 0);
  CHECK(!m.budget_exceeded);
  CHECK(!m.catastrophic);
}

TEST_CASE("invalid call counting covers unknown tools and bad arguments") {
  TaskRecord t = crud_task();
  SequenceAgent agent({call("bogus_tool"), call("create_record", {{"id", "r1"}}),
                       AgentAction::make_finish()});
  const EpisodeTrace trace = run_episode(t, agent);
  const TaskMetrics m = score_task(trace, t);
  CHECK(m.invalid_calls == 2);
  CHECK(!m.fault_affected);
}

TEST_CASE("aggregate slices partition by domain and fault family") {
  std::vector<TaskRecord> tasks;
  std::vector<TaskMetrics> metrics;
  for (int i = 0; i < 4; ++i) {
    TaskRecord t = crud_task();
    t.task_id = "agg-" + std::to_string(i);
    if (i % 2 == 1) {
      FaultSpec f;
      f.fault_type = FaultType::kTimeout;
      f.trigger = TriggerToolName{"create_record"};
      t.fault_plan = {f};
    }
    tasks.push_back(t);
    TaskMetrics m;
    m.task_success = i < 2;
    m.tool_calls_used = i + 1;
    m.fault_affected = i % 2 == 1;
    m.recovery_success = i == 1;
    metrics.push_back(m);
  }
  const AggregateReport r = aggregate(metrics, tasks);
  CHECK(r.n == 4);
  CHECK(r.success_rate == doctest::Approx(0.5));
  CHECK(r.per_fault.at("timeout").n == 2);
  CHECK(r.per_fault.at("none").n == 2);
  CHECK(r.per_fault.at("timeout").recovery_rate == doctest::Approx(0.5));
  CHECK(r.per_domain.at("crud").n == 4);
  CHECK(r.mean_tool_calls == doctest::Approx(2.5));
  CHECK_THROWS(aggregate(metrics, std::vector<TaskRecord>(3, crud_task())));
}

TEST_CASE("report tables and figure data render") {
  std::vector<TaskMetrics> metrics(2);
  metrics[0].task_success = true;
  metrics[0].tool_calls_used = 3;
  const AggregateReport r =
      aggregate(metrics, std::vector<TaskRecord>(2, crud_task()));
  const std::string overall = render_overall_table({{"agent_a", r}});
  CHECK(overall.find("Agent") != std::string::npos);
  CHECK(overall.find("agent_a") != std::string::npos);
  const std::string faults = render_fault_table({{"agent_a", r}});
  CHECK(faults.find("Schema drift recovery") != std::string::npos);
  const std::string fig = figure_data(r);
  CHECK(fig.rfind("k,s_k\n", 0) == 0);
  CHECK(fig.find("32,") != std::string::npos);
}

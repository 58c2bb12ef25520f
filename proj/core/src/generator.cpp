#include "toolbench/generator.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <set>

#include "toolbench/io.hpp"
#include "toolbench/scoring.hpp"
#include "toolbench/stream.hpp"

namespace toolbench {

namespace {

// --- lexical variant pools --------------------------------------------------
// Pool sizes are tuned so a 5000-task train split lands mid-band on
// instruction uniqueness (~1024 instruction combos per domain) and initial
// state uniqueness (~1536 state combos per domain).

constexpr std::array<const char*, 16> kNames = {
    "alpha", "beta",  "gamma", "delta", "omega", "zephyr", "nova",  "quartz",
    "lyra",  "orion", "vega",  "atlas", "rigel", "cosmo",  "echo",  "indigo"};

constexpr std::array<const char*, 4> kCrudVerbs = {"Create", "Add", "Register",
                                                  "Insert"};
constexpr std::array<const char*, 4> kFields = {"status", "owner", "priority",
                                               "category"};
constexpr std::array<const char*, 8> kValues = {"open",     "closed", "pending",
                                               "active",   "archived", "new",
                                               "urgent",   "routine"};

constexpr std::array<const char*, 4> kSearchVerbs = {"Search", "Look", "Query",
                                                     "Hunt"};
constexpr std::array<const char*, 16> kKeywords = {
    "glacier", "harbor",  "meadow",  "canyon",  "estuary", "plateau",
    "lagoon",  "tundra",  "savanna", "fjord",   "dune",    "marsh",
    "basin",   "ridge",   "grotto",  "steppe"};
constexpr std::array<const char*, 16> kAnswerTemplates = {
    "the %s assessment is complete",   "the %s survey was approved",
    "the %s study is finalized",       "the %s review passed",
    "the %s report is archived",       "the %s audit found no issues",
    "the %s inspection is scheduled",  "the %s analysis is pending",
    "the %s measurements are stable",  "the %s samples were collected",
    "the %s data is consistent",       "the %s summary is ready",
    "the %s findings were published",  "the %s records are updated",
    "the %s baseline is established",  "the %s results are verified"};
constexpr std::array<const char*, 4> kDocTitles = {
    "Quarterly field bulletin", "Regional operations digest",
    "Site observation log", "Survey planning memo"};
constexpr std::array<const char*, 8> kFillers = {
    "compiled last season",   "pending further checks",
    "with annotated margins", "from the second expedition",
    "under standard protocol", "awaiting peer sign-off",
    "with revised footnotes",  "from the archive copy"};

constexpr std::array<const char*, 4> kFileVerbs = {"Create", "Write", "Draft",
                                                  "Prepare"};
constexpr std::array<const char*, 2> kAppendVerbs = {"append", "add"};
constexpr std::array<const char*, 8> kLines = {
    "initial findings recorded", "checksum verified twice",
    "handoff notes attached",    "inventory counts match",
    "follow-up items listed",    "deployment steps confirmed",
    "rollback plan documented",  "review comments resolved"};

constexpr std::array<const char*, 4> kSchedVerbs = {"Schedule", "Book", "Plan",
                                                   "Arrange"};
constexpr std::array<const char*, 16> kTitles = {
    "sync with platform team",   "capacity planning review",
    "incident retrospective",    "quarterly roadmap session",
    "design walkthrough",        "onboarding checkpoint",
    "security audit briefing",   "release readiness check",
    "budget alignment call",     "vendor evaluation",
    "metrics deep dive",         "hiring panel debrief",
    "architecture review",       "customer feedback triage",
    "runbook dry run",           "postmortem follow-up"};
constexpr std::array<const char*, 4> kStarts = {"09:00", "10:30", "13:00",
                                               "15:15"};
constexpr std::array<int, 4> kDurations = {30, 60, 90, 120};

std::string add_minutes(const std::string& hhmm, int minutes) {
  const int h = std::stoi(hhmm.substr(0, 2));
  const int m = std::stoi(hhmm.substr(3, 2));
  const int total = h * 60 + m + minutes;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", (total / 60) % 24, total % 60);
  return buf;
}

// --- tool schemas -----------------------------------------------------------

ParamSpec param(const char* name, ValueKind kind, bool required = true) {
  ParamSpec p;
  p.name = name;
  p.value_kind = kind;
  p.required = required;
  return p;
}

ToolSchema tool(const char* name, const char* description,
                std::vector<ParamSpec> params) {
  ToolSchema t;
  t.name = name;
  t.description = description;
  t.params = std::move(params);
  return t;
}

std::vector<ToolSchema> crud_tools() {
  return {
      tool("create_record", "Create a new record with the given fields.",
           {param("id", ValueKind::kString), param("fields", ValueKind::kMap)}),
      tool("read_record", "Read a record by id.", {param("id", ValueKind::kString)}),
      tool("update_record", "Merge fields into an existing record.",
           {param("id", ValueKind::kString), param("fields", ValueKind::kMap)}),
      tool("delete_record", "Delete a record by id.", {param("id", ValueKind::kString)}),
      tool("list_records", "List all record ids.", {}),
  };
}

std::vector<ToolSchema> retrieval_tools() {
  return {
      tool("search", "Rank documents against a query.",
           {param("query", ValueKind::kString)}),
      tool("fetch_document", "Fetch a document by id.",
           {param("id", ValueKind::kString)}),
      tool("submit_answer", "Submit a final answer.",
           {param("text", ValueKind::kString)}),
  };
}

std::vector<ToolSchema> files_tools() {
  return {
      tool("create_file", "Create a file with content.",
           {param("path", ValueKind::kString), param("content", ValueKind::kString)}),
      tool("read_file", "Read a file.", {param("path", ValueKind::kString)}),
      tool("append_file", "Append content to a file.",
           {param("path", ValueKind::kString), param("content", ValueKind::kString)}),
      tool("delete_file", "Delete a file.", {param("path", ValueKind::kString)}),
      tool("list_dir", "List files under a path prefix.",
           {param("path", ValueKind::kString)}),
      tool("move_file", "Move a file.",
           {param("src", ValueKind::kString), param("dst", ValueKind::kString)}),
  };
}

std::vector<ToolSchema> scheduling_tools() {
  return {
      tool("create_event", "Create a calendar event.",
           {param("id", ValueKind::kString), param("start", ValueKind::kString),
            param("end", ValueKind::kString), param("title", ValueKind::kString)}),
      tool("update_event", "Update fields of an event.",
           {param("id", ValueKind::kString),
            param("start", ValueKind::kString, false),
            param("end", ValueKind::kString, false),
            param("title", ValueKind::kString, false)}),
      tool("cancel_event", "Cancel an event.", {param("id", ValueKind::kString)}),
      tool("list_events", "List all event ids.", {}),
      tool("check_conflicts", "Report overlapping event pairs.", {}),
  };
}

// --- per-domain task construction -------------------------------------------

struct PlanStepSpec {
  std::string tool;
  std::map<std::string, Json> args;
  bool optional = false;
};

struct DomainBuild {
  std::string instruction;
  std::vector<ToolSchema> tools;
  DomainState state;
  std::vector<PlanStepSpec> plan;
  std::vector<Criterion> criteria;
  std::string essential_tool;   // first plan tool faults target
  std::string essential_param;  // param the drift fault renames
  std::string drifted_param;    // its renamed form
  std::string stale_param;      // wrong name used by rewrite-family plans
  int trailing_index = 0;       // 1-based call index of the optional step
};

DomainBuild build_crud(uint64_t instr, uint64_t variant) {
  DomainBuild b;
  b.tools = crud_tools();

  const auto verb = kCrudVerbs[instr % 4];
  instr /= 4;
  const std::string rid = std::string("rec-") + kNames[instr % 16];
  instr /= 16;
  const size_t f1 = instr % 4;
  instr /= 4;
  const size_t v1 = instr % 4;
  const size_t f2 = (f1 + 1) % 4;
  const size_t v2 = 4 + (v1 + 1) % 4;

  b.instruction = std::string(verb) + " a record '" + rid + "' with " +
                  kFields[f1] + " set to '" + kValues[v1] +
                  "', then update its " + kFields[f2] + " to '" + kValues[v2] +
                  "'.";

  Json records = Json::object();
  const uint64_t k = 1 + variant % 3;
  uint64_t r = variant / 3;
  const uint64_t base = r % 16, fld = (r / 16) % 4, val = (r / 64) % 8;
  for (uint64_t j = 0; j < k; ++j)
    records[std::string("seed-") + kNames[(base + 3 * j) % 16]] =
        Json{{kFields[(fld + j) % 4], kValues[(val + j) % 8]}};
  b.state = Json{{"records", records}};

  b.plan = {{"create_record", {{"id", rid}, {"fields", Json{{kFields[f1], kValues[v1]}}}}, false},
            {"update_record", {{"id", rid}, {"fields", Json{{kFields[f2], kValues[v2]}}}}, false},
            {"read_record", {{"id", rid}}, true}};
  b.criteria = {StateKeyValue{"records/" + rid, kFields[f1], kValues[v1]},
                StateKeyValue{"records/" + rid, kFields[f2], kValues[v2]}};
  b.essential_tool = "create_record";
  b.essential_param = "fields";
  b.drifted_param = "record_fields";
  b.stale_param = "data";
  b.trailing_index = 3;
  return b;
}

DomainBuild build_retrieval(uint64_t instr, uint64_t variant) {
  DomainBuild b;
  b.tools = retrieval_tools();

  const std::string kw = kKeywords[variant % 16];
  uint64_t t = variant / 16;
  const uint64_t title = t % 4;
  t /= 4;
  const uint64_t filler = t % 8;
  const uint64_t base = (t / 8) % 3;

  Json documents = Json::object();
  std::string target_id;
  for (uint64_t j = 0; j < 3; ++j) {
    const std::string id = std::string("doc-") + kNames[(base * 5 + j) % 16];
    Json doc{{"title", kDocTitles[(title + j) % 4]}};
    if (j == base) {
      doc["text"] = "field notes about the " + kw + " region " +
                    kFillers[filler];
      target_id = id;
    } else {
      doc["text"] = std::string("general notes on routine operations ") +
                    kFillers[(filler + 1 + j) % 8];
    }
    documents[id] = doc;
  }
  b.state = Json{{"documents", documents}, {"answers", Json::array()}};

  const auto verb = kSearchVerbs[instr % 4];
  char ans_buf[128];
  std::snprintf(ans_buf, sizeof(ans_buf), kAnswerTemplates[(instr / 4) % 16],
                kw.c_str());
  const std::string ans = ans_buf;
  b.instruction = std::string(verb) + " for '" + kw +
                  "', open the top result, and submit the answer '" + ans + "'.";

  b.plan = {{"search", {{"query", kw}}, false},
            {"fetch_document", {{"id", target_id}}, false},
            {"submit_answer", {{"text", ans}}, false},
            {"fetch_document", {{"id", target_id}}, true}};
  b.criteria = {StateContains{"answers", ans}, MinSuccessfulToolCalls{3}};
  b.essential_tool = "submit_answer";
  b.essential_param = "text";
  b.drifted_param = "answer_text";
  b.stale_param = "answer";
  b.trailing_index = 4;
  return b;
}

DomainBuild build_files(uint64_t instr, uint64_t variant) {
  DomainBuild b;
  b.tools = files_tools();

  const auto verb = kFileVerbs[instr % 4];
  instr /= 4;
  const std::string fname = std::string("notes_") + kNames[instr % 16] + ".txt";
  instr /= 16;
  const size_t c1 = instr % 8;
  instr /= 8;
  const auto append_verb = kAppendVerbs[instr % 2];
  const size_t c2 = (c1 + 3) % 8;

  b.instruction = std::string(verb) + " a file '" + fname + "' with '" +
                  kLines[c1] + "' and " + append_verb + " '" + kLines[c2] +
                  "' to it.";

  Json files = Json::object();
  const uint64_t k = 1 + variant % 3;
  uint64_t r = variant / 3;
  const uint64_t base = r % 16, ln = (r / 16) % 8, off = (r / 128) % 4;
  for (uint64_t j = 0; j < k; ++j)
    files[std::string("old_") + kNames[(base + 3 * j) % 16] + ".log"] =
        std::string(kLines[(ln + j) % 8]) + " " +
        std::to_string((off + j) % 4 + 1);
  b.state = Json{{"files", files}};

  b.plan = {{"create_file", {{"path", fname}, {"content", std::string(kLines[c1])}}, false},
            {"append_file", {{"path", fname}, {"content", std::string(kLines[c2])}}, false},
            {"read_file", {{"path", fname}}, true}};
  b.criteria = {
      StateEquals{"files/" + fname, std::string(kLines[c1]) + kLines[c2]}};
  b.essential_tool = "create_file";
  b.essential_param = "content";
  b.drifted_param = "body";
  b.stale_param = "contents";
  b.trailing_index = 3;
  return b;
}

DomainBuild build_scheduling(uint64_t instr, uint64_t variant) {
  DomainBuild b;
  b.tools = scheduling_tools();

  const auto verb = kSchedVerbs[instr % 4];
  instr /= 4;
  const size_t eid_i = instr % 16;
  instr /= 16;
  const size_t start_i = instr % 4;
  instr /= 4;
  const size_t dur_i = instr % 4;

  const std::string eid = std::string("ev-") + kNames[eid_i];
  const std::string title = kTitles[(eid_i + 5) % 16];
  const std::string start = kStarts[start_i];
  const std::string end = add_minutes(start, kDurations[dur_i]);

  b.instruction = std::string(verb) + " '" + title + "' as event '" + eid +
                  "' from " + start + " to " + end + ".";

  Json events = Json::object();
  const uint64_t k = 1 + variant % 3;
  uint64_t r = variant / 3;
  const uint64_t base = r % 16, st = (r / 16) % 4, du = (r / 64) % 8;
  for (uint64_t j = 0; j < k; ++j) {
    const std::string old_start = kStarts[(st + j) % 4];
    events[std::string("old-") + kNames[(base + 3 * j) % 16]] =
        Json{{"start", old_start},
             {"end", add_minutes(old_start, kDurations[(du + j) % 4])},
             {"title", kTitles[(du * 2 + j) % 16]}};
  }
  b.state = Json{{"events", events}};

  b.plan = {{"create_event",
             {{"id", eid}, {"start", start}, {"end", end}, {"title", title}},
             false},
            {"list_events", {}, true}};
  b.criteria = {StateKeyValue{"events/" + eid, "title", title},
                StateEquals{"events/" + eid + "/start", start}};
  b.essential_tool = "create_event";
  b.essential_param = "title";
  b.drifted_param = "summary";
  b.stale_param = "name";
  b.trailing_index = 2;
  return b;
}

// --- fault attachment -------------------------------------------------------

// Within each family a per-split counter alternates the sub-cases, so fired
// vs. dormant placement and transient vs. persistent parameters split
// exactly 50/50.
void attach_fault(TaskRecord& task, DomainBuild& build,
                  const std::string& family, int family_counter) {
  if (family == "none") return;
  FaultSpec f;

  if (family == "schema_drift") {
    f.fault_type = FaultType::kSchemaDrift;
    const int mode = family_counter % 4;
    if (mode == 0) {
      f.trigger = TriggerToolName{build.essential_tool};
      f.param_rename_map[build.essential_param] = build.drifted_param;
    } else if (mode == 2) {
      f.trigger = TriggerToolName{build.essential_tool};
      f.tool_rename = {build.essential_tool, build.essential_tool + "_v2"};
    } else {
      // Dormant placement: the trigger index is past the point where the
      // task completes, so the drift never fires.
      f.trigger = TriggerNthCall{build.trailing_index};
      f.tool_rename = {build.essential_tool, build.essential_tool + "_v2"};
    }
  } else if (family == "rate_limit") {
    f.fault_type = FaultType::kRateLimit;
    f.trigger = TriggerToolName{build.essential_tool};
    f.retry_after_steps = task.budgets.max_steps + 5;
    f.recover_after_failures = 0;
  } else if (family == "timeout") {
    f.fault_type = FaultType::kTimeout;
    const int mode = family_counter % 4;
    if (mode == 0 || mode == 2)
      f.trigger = TriggerToolName{build.essential_tool};
    else
      f.trigger = TriggerNthCall{build.trailing_index};
    f.fail_count_before_recovery = mode < 2 ? 1 : 0;
  } else if (family == "auth_failure") {
    f.fault_type = FaultType::kAuthFailure;
    f.trigger = TriggerToolName{build.essential_tool};
    f.persistent = true;
  } else if (family == "adversarial_rewrite") {
    f.fault_type = FaultType::kAdversarialRewrite;
    f.trigger = TriggerToolName{build.essential_tool};
    f.style = static_cast<RewriteStyle>(family_counter % 3);
    // The rewrite needs an error to corrupt: the plan's essential step
    // carries a stale param name, so the first call fails validation.
    for (auto& step : build.plan) {
      if (step.tool != build.essential_tool) continue;
      auto it = step.args.find(build.essential_param);
      if (it != step.args.end()) {
        step.args[build.stale_param] = it->second;
        step.args.erase(it);
      }
      break;
    }
  }
  task.fault_plan.push_back(std::move(f));
}

void attach_policy_rules(TaskRecord& task, const DomainBuild& build, int index) {
  if (index % 3 == 0) {
    switch (task.domain) {
      case Domain::kCrud: task.policy_rules.push_back(ForbiddenTool{"delete_record"}); break;
      case Domain::kRetrieval: task.policy_rules.push_back(MaxCallsPerTool{"search", 5}); break;
      case Domain::kFiles: task.policy_rules.push_back(ForbiddenTool{"delete_file"}); break;
      case Domain::kScheduling: task.policy_rules.push_back(ForbiddenTool{"cancel_event"}); break;
    }
  }
  if (index % 7 == 0 && build.plan.size() >= 2 && !build.plan[1].optional &&
      build.plan[0].tool != build.plan[1].tool) {
    task.policy_rules.push_back(
        RequireSuccessBefore{build.plan[0].tool, build.plan[1].tool});
  }
}

Json annotation_from(const DomainBuild& build, const TaskRecord& task) {
  Json plan = Json::array();
  for (const auto& step : build.plan) {
    Json args = Json::object();
    for (const auto& [k, v] : step.args) args[k] = v;
    plan.push_back(Json{{"tool", step.tool}, {"args", args}, {"optional", step.optional}});
  }
  Json rules = Json::array();
  for (const auto& r : task.policy_rules) rules.push_back(to_json(r));
  return Json{{"plan", plan}, {"policy_rules", rules}};
}

// Largest-remainder bucket counts; deviation from exact shares is at most
// one task per bucket.
std::vector<int> largest_remainder(int n,
                                   const std::vector<double>& shares) {
  std::vector<int> counts(shares.size());
  std::vector<std::pair<double, size_t>> fractional;
  int assigned = 0;
  for (size_t i = 0; i < shares.size(); ++i) {
    const double quota = n * shares[i];
    counts[i] = static_cast<int>(quota);
    assigned += counts[i];
    fractional.emplace_back(quota - counts[i], i);
  }
  std::stable_sort(fractional.begin(), fractional.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; i < n - assigned; ++i) counts[fractional[i].second] += 1;
  return counts;
}

// Interleaved schedule realizing the counts exactly: each slot goes to the
// bucket with the most remaining quota, ties to the lower index.
std::vector<int> interleave(const std::vector<int>& counts) {
  std::vector<int> remaining = counts;
  int total = 0;
  for (int c : counts) total += c;
  std::vector<int> schedule;
  schedule.reserve(total);
  for (int i = 0; i < total; ++i) {
    int best = -1;
    for (size_t b = 0; b < remaining.size(); ++b)
      if (best < 0 || remaining[b] > remaining[best]) best = static_cast<int>(b);
    schedule.push_back(best);
    --remaining[best];
  }
  return schedule;
}

const std::vector<std::string>& fault_families() {
  static const std::vector<std::string> families = {
      "none",         "schema_drift",       "rate_limit",
      "timeout",      "auth_failure",       "adversarial_rewrite"};
  return families;
}

const std::vector<std::string>& domain_names() {
  static const std::vector<std::string> domains = {"crud", "retrieval", "files",
                                                   "scheduling"};
  return domains;
}

std::vector<TaskRecord> generate_split(const GenerationProfile& profile,
                                       const std::string& split, int n) {
  std::vector<double> domain_shares, fault_shares;
  for (const auto& d : domain_names()) domain_shares.push_back(profile.domain_mix.at(d));
  for (const auto& f : fault_families()) fault_shares.push_back(profile.fault_mix.at(f));

  const auto domain_schedule = interleave(largest_remainder(n, domain_shares));
  const auto fault_schedule = interleave(largest_remainder(n, fault_shares));
  std::map<std::string, int> family_counters;

  std::vector<TaskRecord> tasks;
  tasks.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::string prefix = "gen/" + split + "/" + std::to_string(i) + "/";
    SeededStream instr_stream(profile.seed, prefix + "instr");
    SeededStream variant_stream(profile.seed, prefix + "variant");
    SeededStream seed_stream(profile.seed, prefix + "seed");

    const Domain domain = static_cast<Domain>(domain_schedule[i]);
    const std::string family = fault_families()[fault_schedule[i]];
    const uint64_t variant = variant_stream.next_below(1536);
    const uint64_t instr = instr_stream.next_below(1024);

    DomainBuild build;
    switch (domain) {
      case Domain::kCrud: build = build_crud(instr, variant); break;
      case Domain::kRetrieval: build = build_retrieval(instr, variant); break;
      case Domain::kFiles: build = build_files(instr, variant); break;
      case Domain::kScheduling: build = build_scheduling(instr, variant); break;
    }

    TaskRecord task;
    task.domain = domain;
    task.instruction = build.instruction;
    task.tool_schemas = build.tools;
    task.initial_state = build.state;
    task.success_criteria = build.criteria;
    task.budgets = Budget{12, 10, 2, 1000};
    task.seed = seed_stream.next_u64();
    task.version = kBenchmarkVersion;

    attach_fault(task, build, family, family_counters[family]++);
    attach_policy_rules(task, build, i);
    task.goal_annotation = annotation_from(build, task);

    // Content-addressed id: hash of the record with a blank id slot.
    task.task_id.clear();
    const std::string digest = sha256_hex(canonical_bytes(to_json(task)));
    task.task_id = split + "-" + std::to_string(i) + "-" + digest.substr(0, 8);

    const auto errors = validate_task(task);
    if (!errors.empty()) {
      throw GenerationError("generation aborted at " + split + "[" +
                            std::to_string(i) + "]: " + errors.front().rule +
                            " (" + errors.front().message + ")");
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

}  // namespace

GenerationProfile profile_by_name(const std::string& name, uint64_t seed) {
  GenerationProfile p;
  p.name = name;
  p.seed = seed;
  if (name == "large") {
    p.split_sizes = {{"train", 5000}, {"dev", 800}, {"test", 1000}};
  } else if (name == "default") {
    p.split_sizes = {{"train", 1000}, {"dev", 160}, {"test", 200}};
  } else if (name == "small") {
    p.split_sizes = {{"train", 120}, {"dev", 24}, {"test", 48}};
  } else {
    throw std::invalid_argument("unknown profile '" + name + "'");
  }
  for (const auto& d : domain_names()) p.domain_mix[d] = 0.25;
  for (const auto& f : fault_families()) p.fault_mix[f] = 1.0 / 6.0;
  return p;
}

std::string split_file_bytes(const std::vector<TaskRecord>& tasks) {
  std::string bytes;
  for (const auto& t : tasks) {
    bytes += canonical_bytes(to_json(t));
    bytes += '\n';
  }
  return bytes;
}

Dataset generate(const GenerationProfile& profile) {
  Dataset out;
  out.manifest.benchmark_version = kBenchmarkVersion;
  out.manifest.generator_version = kGeneratorVersion;
  out.manifest.seed = profile.seed;
  out.manifest.frozen = true;
  for (const auto& [split, n] : profile.split_sizes) {
    auto tasks = generate_split(profile, split, n);
    SplitChecksum checksum;
    checksum.file = split + ".tasks.jsonl";
    checksum.count = n;
    checksum.sha256 = sha256_hex(split_file_bytes(tasks));
    out.manifest.splits.emplace_back(split, checksum);
    out.splits.emplace_back(split, std::move(tasks));
  }
  return out;
}

Json to_json(const DatasetManifest& m) {
  Json splits = Json::object();
  for (const auto& [name, c] : m.splits)
    splits[name] = Json{{"file", c.file}, {"count", c.count}, {"sha256", c.sha256}};
  return Json{{"benchmark_version", m.benchmark_version},
              {"generator_version", m.generator_version},
              {"seed", m.seed},
              {"frozen", m.frozen},
              {"splits", splits}};
}

DatasetManifest manifest_from_json(const Json& j) {
  DatasetManifest m;
  m.benchmark_version = j.at("benchmark_version").get<std::string>();
  m.generator_version = j.at("generator_version").get<std::string>();
  m.seed = j.at("seed").get<uint64_t>();
  m.frozen = j.at("frozen").get<bool>();
  for (const auto& [name, c] : j.at("splits").items())
    m.splits.emplace_back(
        name, SplitChecksum{c.at("file").get<std::string>(),
                            c.at("count").get<int>(),
                            c.at("sha256").get<std::string>()});
  return m;
}

QualityReport quality_report(
    const std::vector<std::pair<std::string, std::vector<TaskRecord>>>& splits) {
  QualityReport report;
  std::set<std::string> all_ids;
  for (const auto& [name, tasks] : splits) {
    SplitQuality q;
    q.count = static_cast<int>(tasks.size());
    std::set<std::string> instructions, states, ids;
    for (const auto& t : tasks) {
      instructions.insert(t.instruction);
      states.insert(canonical_bytes(t.initial_state));
      if (!ids.insert(t.task_id).second) ++q.duplicate_task_ids;
      if (!all_ids.insert(t.task_id).second)
        ++report.duplicate_task_ids_across_splits;
      q.domain_histogram[to_string(t.domain)] += 1;
      q.fault_histogram[task_fault_family(t)] += 1;
    }
    if (!tasks.empty()) {
      q.instruction_uniqueness =
          static_cast<double>(instructions.size()) / tasks.size();
      q.initial_state_uniqueness =
          static_cast<double>(states.size()) / tasks.size();
    }
    report.per_split[name] = std::move(q);
  }
  return report;
}

Json to_json(const QualityReport& r) {
  Json splits = Json::object();
  for (const auto& [name, q] : r.per_split) {
    splits[name] = Json{{"count", q.count},
                        {"instruction_uniqueness", q.instruction_uniqueness},
                        {"initial_state_uniqueness", q.initial_state_uniqueness},
                        {"domain_histogram", q.domain_histogram},
                        {"fault_histogram", q.fault_histogram},
                        {"duplicate_task_ids", q.duplicate_task_ids}};
  }
  return Json{{"per_split", splits},
              {"duplicate_task_ids_across_splits",
               r.duplicate_task_ids_across_splits}};
}

std::vector<ManifestMismatch> verify_manifest(const DatasetManifest& manifest,
                                              const std::string& dir) {
  std::vector<ManifestMismatch> mismatches;
  for (const auto& [name, checksum] : manifest.splits) {
    const std::string path = dir + "/" + checksum.file;
    if (!std::filesystem::exists(path)) {
      mismatches.push_back({name, "missing file " + checksum.file});
      continue;
    }
    const std::string actual = sha256_hex(read_file_bytes(path));
    if (actual != checksum.sha256)
      mismatches.push_back({name, "checksum mismatch for " + checksum.file});
  }
  return mismatches;
}

void write_dataset(const Dataset& dataset, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, tasks] : dataset.splits) {
    write_file_bytes(dir + "/" + name + ".tasks.jsonl", split_file_bytes(tasks));
  }
  write_file_bytes(dir + "/manifest.json",
                   canonical_bytes(to_json(dataset.manifest)) + "\n");
  write_file_bytes(dir + "/quality_report.json",
                   canonical_bytes(to_json(quality_report(dataset.splits))) + "\n");
}

std::vector<TaskRecord> load_split(const std::string& path) {
  std::vector<TaskRecord> tasks;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    tasks.push_back(task_record_from_json(parse_json(line)));
  }
  return tasks;
}

}  // namespace toolbench

#include <atomic>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "toolbench/baselines.hpp"
#include "toolbench/generator.hpp"
#include "toolbench/io.hpp"
#include "toolbench/runner.hpp"
#include "toolbench/scoring.hpp"
#include "toolbench/wire.hpp"

namespace fs = std::filesystem;
using namespace toolbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : command) {
    if (ch == ' ') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

DatasetManifest load_manifest(const std::string& data_dir) {
  return manifest_from_json(
      parse_json(read_file_bytes(data_dir + "/manifest.json")));
}

int cmd_generate(const std::string& profile_name, uint64_t seed,
                 const std::string& out_dir,
                 const std::vector<std::string>& overrides) {
  GenerationProfile profile = profile_by_name(profile_name, seed);
  for (const auto& spec : overrides) {
    const size_t eq = spec.find('=');
    if (eq == std::string::npos) {
      std::cerr << "bad --split override '" << spec << "', expected name=count\n";
      return kExitUsage;
    }
    const std::string name = spec.substr(0, eq);
    const int count = std::stoi(spec.substr(eq + 1));
    bool found = false;
    for (auto& [split, n] : profile.split_sizes) {
      if (split == name) {
        n = count;
        found = true;
      }
    }
    if (!found || count < 1) {
      std::cerr << "bad --split override '" << spec << "'\n";
      return kExitUsage;
    }
  }

  try {
    Dataset dataset = generate(profile);
    write_dataset(dataset, out_dir);
    int total = 0;
    for (const auto& [name, checksum] : dataset.manifest.splits) {
      std::cout << name << ": " << checksum.count << " tasks, sha256 "
                << checksum.sha256.substr(0, 12) << "...\n";
      total += checksum.count;
    }
    std::cout << total << " tasks written to " << out_dir << "\n";
  } catch (const GenerationError& e) {
    std::cerr << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct EpisodeOutput {
  EpisodeTrace trace;
  TaskMetrics metrics;
};

int cmd_evaluate(const std::string& data_dir, const std::string& split,
                 const std::string& agent_name, const std::string& agent_cmd,
                 const std::string& out_dir, int parallel, bool skip_verify,
                 int reply_deadline_ms) {
  if (agent_name.empty() == agent_cmd.empty()) {
    std::cerr << "exactly one of --agent / --agent-cmd is required\n";
    return kExitUsage;
  }

  DatasetManifest manifest;
  try {
    manifest = load_manifest(data_dir);
  } catch (const std::exception& e) {
    std::cerr << "cannot load manifest: " << e.what() << "\n";
    return kExitFailure;
  }
  if (!skip_verify) {
    const auto mismatches = verify_manifest(manifest, data_dir);
    if (!mismatches.empty()) {
      for (const auto& m : mismatches)
        std::cerr << "manifest mismatch [" << m.split << "]: " << m.detail << "\n";
      std::cerr << "refusing to evaluate; pass --no-verify-manifest to override\n";
      return kExitFailure;
    }
  }

  std::vector<TaskRecord> tasks;
  try {
    tasks = load_split(data_dir + "/" + split + ".tasks.jsonl");
  } catch (const std::exception& e) {
    std::cerr << "cannot load split '" << split << "': " << e.what() << "\n";
    return kExitFailure;
  }
  if (tasks.empty()) {
    std::cerr << "split '" << split << "' is empty\n";
    return kExitFailure;
  }

  auto make_agent = [&]() -> std::unique_ptr<Agent> {
    if (!agent_name.empty()) return make_baseline(agent_name);
    return spawn_external_agent(split_command(agent_cmd), reply_deadline_ms);
  };

  std::vector<EpisodeOutput> outputs(tasks.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  const int workers = std::max(1, std::min<int>(parallel, tasks.size()));
  auto worker = [&]() {
    std::unique_ptr<Agent> agent;
    try {
      agent = make_agent();
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      failure_message = e.what();
      failed = true;
      return;
    }
    while (!failed) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      outputs[i].trace = run_episode(tasks[i], *agent);
      outputs[i].metrics = score_task(outputs[i].trace, tasks[i]);
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failed) {
    std::cerr << failure_message << "\n";
    return kExitFailure;
  }

  fs::create_directories(out_dir + "/traces");
  std::vector<TaskMetrics> metrics;
  std::vector<std::string> metric_lines;
  metrics.reserve(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) {
    write_lines(out_dir + "/traces/" + tasks[i].task_id + ".trace.jsonl",
                trace_lines(outputs[i].trace));
    Json line = to_json(outputs[i].metrics);
    line["task_id"] = tasks[i].task_id;
    metric_lines.push_back(canonical_bytes(line));
    metrics.push_back(outputs[i].metrics);
  }
  write_lines(out_dir + "/metrics.jsonl", metric_lines);

  const AggregateReport report = aggregate(metrics, tasks);
  const std::string label = agent_name.empty() ? "external" : agent_name;
  const std::vector<std::pair<std::string, AggregateReport>> rows = {
      {label, report}};
  const std::string tables =
      render_overall_table(rows) + "\n" + render_fault_table(rows);

  write_file_bytes(out_dir + "/report.json",
                   canonical_bytes(to_json(report)) + "\n");
  write_file_bytes(out_dir + "/report.txt", tables);
  write_file_bytes(out_dir + "/figure_sk.csv", figure_data(report));
  std::cout << tables;
  return kExitOk;
}

int cmd_replay(const std::string& data_dir, const std::string& split,
               const std::vector<std::string>& trace_paths) {
  std::map<std::string, TaskRecord> by_id;
  try {
    for (auto& t : load_split(data_dir + "/" + split + ".tasks.jsonl"))
      by_id.emplace(t.task_id, std::move(t));
  } catch (const std::exception& e) {
    std::cerr << "cannot load split '" << split << "': " << e.what() << "\n";
    return kExitFailure;
  }

  bool all_ok = true;
  for (const auto& path : trace_paths) {
    EpisodeTrace trace;
    try {
      trace = trace_from_lines(read_lines(path));
    } catch (const std::exception& e) {
      std::cout << path << ": unreadable (" << e.what() << ")\n";
      all_ok = false;
      continue;
    }
    auto it = by_id.find(trace.task_id);
    if (it == by_id.end()) {
      std::cout << path << ": task '" << trace.task_id << "' not in split\n";
      all_ok = false;
      continue;
    }
    const ReplayVerdict verdict = replay_trace(it->second, trace);
    if (verdict.ok) {
      std::cout << path << ": ok\n";
    } else {
      std::cout << path << ": diverged at step " << verdict.diverged_at_step << " ("
                << verdict.detail << ")\n";
      all_ok = false;
    }
  }
  return all_ok ? kExitOk : kExitFailure;
}

int cmd_report(const std::string& data_dir, const std::string& split,
               const std::vector<std::string>& runs) {
  std::vector<TaskRecord> tasks;
  try {
    tasks = load_split(data_dir + "/" + split + ".tasks.jsonl");
  } catch (const std::exception& e) {
    std::cerr << "cannot load split '" << split << "': " << e.what() << "\n";
    return kExitFailure;
  }

  std::vector<std::pair<std::string, AggregateReport>> rows;
  for (const auto& run : runs) {
    const size_t eq = run.find('=');
    if (eq == std::string::npos) {
      std::cerr << "bad run spec '" << run << "', expected label=metrics.jsonl\n";
      return kExitUsage;
    }
    const std::string label = run.substr(0, eq);
    std::vector<TaskMetrics> metrics;
    try {
      for (const auto& line : read_lines(run.substr(eq + 1))) {
        if (line.empty()) continue;
        metrics.push_back(task_metrics_from_json(parse_json(line)));
      }
      rows.emplace_back(label, aggregate(metrics, tasks));
    } catch (const std::exception& e) {
      std::cerr << "cannot aggregate '" << run << "': " << e.what() << "\n";
      return kExitFailure;
    }
  }
  std::cout << render_overall_table(rows) << "\n" << render_fault_table(rows);
  return kExitOk;
}

int cmd_quality_report(const std::string& data_dir) {
  DatasetManifest manifest;
  try {
    manifest = load_manifest(data_dir);
  } catch (const std::exception& e) {
    std::cerr << "cannot load manifest: " << e.what() << "\n";
    return kExitFailure;
  }
  std::vector<std::pair<std::string, std::vector<TaskRecord>>> splits;
  for (const auto& [name, checksum] : manifest.splits)
    splits.emplace_back(name, load_split(data_dir + "/" + checksum.file));
  std::cout << to_json(quality_report(splits)).dump(2) << "\n";
  return kExitOk;
}

int cmd_agent(const std::string& name) {
  auto agent = make_baseline(name);
  serve_agent(*agent, std::cin, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic tool-use evaluation harness"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Generate a dataset");
  std::string profile = "default";
  uint64_t seed = 0;
  std::string out_dir = "data";
  std::vector<std::string> split_overrides;
  gen->add_option("--profile", profile, "Profile: small, default, large");
  gen->add_option("--seed", seed, "Generation seed");
  gen->add_option("--out", out_dir, "Output directory");
  gen->add_option("--split", split_overrides,
                  "Split size override, e.g. train=100 (repeatable)");

  auto* eval = app.add_subcommand("evaluate", "Evaluate an agent on a split");
  std::string data_dir = "data", split = "test", agent_name, agent_cmd,
              eval_out = "out";
  int parallel = 1, reply_deadline_ms = 30000;
  bool no_verify = false;
  eval->add_option("--data", data_dir, "Dataset directory");
  eval->add_option("--split", split, "Split name");
  eval->add_option("--agent", agent_name,
                   "Builtin agent: heuristic, schema_repair, policy_aware");
  eval->add_option("--agent-cmd", agent_cmd,
                   "External agent command (wire protocol over stdio)");
  eval->add_option("--out", eval_out, "Output directory");
  eval->add_option("--parallel", parallel, "Worker count");
  eval->add_option("--reply-deadline-ms", reply_deadline_ms,
                   "External agent reply deadline");
  eval->add_flag("--no-verify-manifest", no_verify,
                 "Skip manifest checksum verification");

  auto* replay = app.add_subcommand("replay", "Verify recorded traces");
  std::string replay_data = "data", replay_split = "test";
  std::vector<std::string> trace_paths;
  replay->add_option("--data", replay_data, "Dataset directory");
  replay->add_option("--split", replay_split, "Split name");
  replay->add_option("traces", trace_paths, "Trace files")->required();

  auto* report = app.add_subcommand("report", "Render tables from metric files");
  std::string report_data = "data", report_split = "test";
  std::vector<std::string> runs;
  report->add_option("--data", report_data, "Dataset directory");
  report->add_option("--split", report_split, "Split name");
  report->add_option("runs", runs, "label=metrics.jsonl entries")->required();

  auto* quality = app.add_subcommand("quality-report", "Recompute dataset quality");
  std::string quality_data = "data";
  quality->add_option("--data", quality_data, "Dataset directory");

  auto* serve = app.add_subcommand("agent", "Serve a builtin agent over stdio");
  std::string serve_name = "heuristic";
  serve->add_option("--name", serve_name, "Builtin agent name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(profile, seed, out_dir, split_overrides);
    if (eval->parsed())
      return cmd_evaluate(data_dir, split, agent_name, agent_cmd, eval_out,
                          parallel, no_verify, reply_deadline_ms);
    if (replay->parsed()) return cmd_replay(replay_data, replay_split, trace_paths);
    if (report->parsed()) return cmd_report(report_data, report_split, runs);
    if (quality->parsed()) return cmd_quality_report(quality_data);
    if (serve->parsed()) return cmd_agent(serve_name);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

#include <benchmark/benchmark.h>

#include "toolbench/baselines.hpp"
#include "toolbench/canonical.hpp"
#include "toolbench/generator.hpp"
#include "toolbench/runner.hpp"
#include "toolbench/scoring.hpp"
#include "toolbench/stream.hpp"

using namespace toolbench;

namespace {

const Dataset& small_dataset() {
  static const Dataset d = generate(profile_by_name("small", 7));
  return d;
}

void BM_StreamNextU64(benchmark::State& state) {
  SeededStream s(7, "bench/stream");
  for (auto _ : state) benchmark::DoNotOptimize(s.next_u64());
}
BENCHMARK(BM_StreamNextU64);

void BM_CanonicalBytes(benchmark::State& state) {
  const Json record = to_json(small_dataset().splits[0].second[0]);
  for (auto _ : state) benchmark::DoNotOptimize(canonical_bytes(record));
}
BENCHMARK(BM_CanonicalBytes);

void BM_Sha256TaskRecord(benchmark::State& state) {
  const std::string bytes =
      canonical_bytes(to_json(small_dataset().splits[0].second[0]));
  for (auto _ : state) benchmark::DoNotOptimize(sha256_hex(bytes));
}
BENCHMARK(BM_Sha256TaskRecord);

void BM_GenerateSmallProfile(benchmark::State& state) {
  const GenerationProfile profile = profile_by_name("small", 11);
  for (auto _ : state) benchmark::DoNotOptimize(generate(profile));
}
BENCHMARK(BM_GenerateSmallProfile)->Unit(benchmark::kMillisecond);

void BM_RunEpisode(benchmark::State& state) {
  const TaskRecord& task = small_dataset().splits[2].second[0];
  for (auto _ : state) {
    auto agent = make_baseline("schema_repair");
    benchmark::DoNotOptimize(run_episode(task, *agent));
  }
}
BENCHMARK(BM_RunEpisode);

void BM_ScoreSplit(benchmark::State& state) {
  const auto& tasks = small_dataset().splits[2].second;
  std::vector<TaskMetrics> metrics;
  std::unique_ptr<Agent> agent = make_baseline("heuristic");
  for (const auto& t : tasks) metrics.push_back(score_task(run_episode(t, *agent), t));
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(metrics, tasks));
}
BENCHMARK(BM_ScoreSplit);

}  // namespace

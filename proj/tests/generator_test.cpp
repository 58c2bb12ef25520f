#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "toolbench/generator.hpp"
#include "toolbench/io.hpp"
#include "toolbench/validate.hpp"

using namespace toolbench;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tb-gen-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("generation is a pure function of the profile") {
  const GenerationProfile profile = profile_by_name("small", 13);
  const Dataset a = generate(profile);
  const Dataset b = generate(profile);
  REQUIRE(a.splits.size() == 3);
  for (size_t i = 0; i < a.splits.size(); ++i) {
    CHECK(split_file_bytes(a.splits[i].second) ==
          split_file_bytes(b.splits[i].second));
    CHECK(a.manifest.splits[i].second.sha256 == b.manifest.splits[i].second.sha256);
  }

  const Dataset c = generate(profile_by_name("small", 14));
  CHECK(a.manifest.splits[0].second.sha256 != c.manifest.splits[0].second.sha256);
}

TEST_CASE("every generated record validates and has a unique id") {
  const Dataset d = generate(profile_by_name("small", 5));
  std::set<std::string> ids;
  for (const auto& [name, tasks] : d.splits) {
    for (const auto& t : tasks) {
      CHECK(validate_task(t).empty());
      CHECK(ids.insert(t.task_id).second);
      CHECK(t.version == kBenchmarkVersion);
      CHECK(t.budgets.max_steps == 12);
      CHECK(t.budgets.max_tool_calls == 10);
      CHECK(t.budgets.max_retries == 2);
    }
  }
}

TEST_CASE("task ids are content addressed") {
  const Dataset d = generate(profile_by_name("small", 5));
  const TaskRecord& t = d.splits[0].second[0];
  TaskRecord blanked = t;
  blanked.task_id.clear();
  const std::string digest = sha256_hex(canonical_bytes(to_json(blanked)));
  CHECK(t.task_id == "train-0-" + digest.substr(0, 8));
}

TEST_CASE("histograms deviate at most one task per bucket") {
  const Dataset d = generate(profile_by_name("small", 3));
  const QualityReport q = quality_report(d.splits);
  for (const auto& [name, sq] : q.per_split) {
    CHECK(sq.duplicate_task_ids == 0);
    for (const auto& [domain, count] : sq.domain_histogram) {
      const double exact = sq.count / 4.0;
      CHECK(std::abs(count - exact) <= 1.0);
    }
    for (const auto& [family, count] : sq.fault_histogram) {
      const double exact = sq.count / 6.0;
      CHECK(std::abs(count - exact) <= 1.0);
    }
    CHECK(sq.instruction_uniqueness > 0.0);
    CHECK(sq.instruction_uniqueness <= 1.0);
  }
  CHECK(q.duplicate_task_ids_across_splits == 0);
}

TEST_CASE("split size overrides respect the declared counts") {
  GenerationProfile profile = profile_by_name("small", 2);
  profile.split_sizes = {{"train", 8}, {"dev", 5}, {"test", 6}};
  const Dataset d = generate(profile);
  CHECK(d.splits[0].second.size() == 8);
  CHECK(d.splits[1].second.size() == 5);
  CHECK(d.splits[2].second.size() == 6);
  CHECK(d.manifest.splits[1].second.count == 5);
}

TEST_CASE("written datasets verify and reload byte-identically") {
  TempDir dir;
  const Dataset d = generate(profile_by_name("small", 9));
  write_dataset(d, dir.path.string());

  CHECK(verify_manifest(d.manifest, dir.path.string()).empty());

  const DatasetManifest reloaded = manifest_from_json(
      parse_json(read_file_bytes((dir.path / "manifest.json").string())));
  CHECK(reloaded.seed == 9);
  CHECK(reloaded.frozen);
  CHECK(verify_manifest(reloaded, dir.path.string()).empty());

  const auto tasks = load_split((dir.path / "train.tasks.jsonl").string());
  CHECK(split_file_bytes(tasks) == split_file_bytes(d.splits[0].second));
}

TEST_CASE("manifest verification catches tampering and missing files") {
  TempDir dir;
  const Dataset d = generate(profile_by_name("small", 9));
  write_dataset(d, dir.path.string());

  // Flip one byte in the train split.
  const std::string path = (dir.path / "train.tasks.jsonl").string();
  std::string bytes = read_file_bytes(path);
  bytes[bytes.size() / 2] ^= 0x01;
  write_file_bytes(path, bytes);
  auto mismatches = verify_manifest(d.manifest, dir.path.string());
  REQUIRE(mismatches.size() == 1);
  CHECK(mismatches[0].split == "train");

  fs::remove(dir.path / "dev.tasks.jsonl");
  mismatches = verify_manifest(d.manifest, dir.path.string());
  CHECK(mismatches.size() == 2);
}

TEST_CASE("unknown profiles are rejected") {
  CHECK_THROWS(profile_by_name("gigantic", 0));
}

TEST_CASE("profile shapes match the published sizes") {
  const GenerationProfile large = profile_by_name("large", 0);
  REQUIRE(large.split_sizes.size() == 3);
  CHECK(large.split_sizes[0] == std::pair<std::string, int>{"train", 5000});
  CHECK(large.split_sizes[1] == std::pair<std::string, int>{"dev", 800});
  CHECK(large.split_sizes[2] == std::pair<std::string, int>{"test", 1000});
}

#pragma once

#include <map>
#include <string>
#include <vector>

#include "toolbench/task.hpp"
#include "toolbench/validate.hpp"

namespace toolbench {

inline constexpr const char* kBenchmarkVersion = "1.0.0";
inline constexpr const char* kGeneratorVersion = "0.1.0";

struct GenerationProfile {
  std::string name = "default";
  // Ordered train, dev, test.
  std::vector<std::pair<std::string, int>> split_sizes;
  uint64_t seed = 0;
  // Shares over {none, schema_drift, rate_limit, timeout, auth_failure,
  // adversarial_rewrite}; must sum to 1.
  std::map<std::string, double> fault_mix;
  std::map<std::string, double> domain_mix;
};

// Built-in profiles: small, default, large (train 5000 / dev 800 / test
// 1000). Mixes are uniform.
GenerationProfile profile_by_name(const std::string& name, uint64_t seed);

struct SplitChecksum {
  std::string file;
  int count = 0;
  std::string sha256;
};

struct DatasetManifest {
  std::string benchmark_version;
  std::string generator_version;
  uint64_t seed = 0;
  bool frozen = true;
  std::vector<std::pair<std::string, SplitChecksum>> splits;
};

Json to_json(const DatasetManifest&);
DatasetManifest manifest_from_json(const Json&);

struct SplitQuality {
  int count = 0;
  double instruction_uniqueness = 0.0;
  double initial_state_uniqueness = 0.0;
  std::map<std::string, int> domain_histogram;
  std::map<std::string, int> fault_histogram;
  int duplicate_task_ids = 0;
};

struct QualityReport {
  std::map<std::string, SplitQuality> per_split;
  int duplicate_task_ids_across_splits = 0;
};

Json to_json(const QualityReport&);

struct Dataset {
  std::vector<std::pair<std::string, std::vector<TaskRecord>>> splits;
  DatasetManifest manifest;
};

// Raised when a generated record fails validation; generation aborts.
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pure function of the profile: same profile, byte-identical splits and
// checksums.
Dataset generate(const GenerationProfile& profile);

QualityReport quality_report(
    const std::vector<std::pair<std::string, std::vector<TaskRecord>>>& splits);

// Serialized split file bytes: one canonical record per line, LF.
std::string split_file_bytes(const std::vector<TaskRecord>& tasks);

struct ManifestMismatch {
  std::string split;
  std::string detail;
};

// Recomputes checksums over the files in `dir`; empty result means ok.
std::vector<ManifestMismatch> verify_manifest(const DatasetManifest& manifest,
                                              const std::string& dir);

// Writes split files, manifest.json, and quality_report.json into `dir`.
void write_dataset(const Dataset& dataset, const std::string& dir);

// Loads one split file.
std::vector<TaskRecord> load_split(const std::string& path);

}  // namespace toolbench

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dialogsweep/batchrunner.hpp"
#include "dialogsweep/clock.hpp"
#include "dialogsweep/corpus.hpp"
#include "dialogsweep/promptkit.hpp"
#include "dialogsweep/telemetry.hpp"
#include "dialogsweep/transport.hpp"

namespace dialogsweep {

inline constexpr const char* kHarnessVersion = "0.3.0";

struct MeterConfig {
  enum class Mode { Simulated, Hardware };
  Mode mode = Mode::Simulated;
  double cpu_w = 60.0;
  double gpu_w = 230.0;
  double dram_w = 10.0;
};

struct SweepConfig {
  std::filesystem::path corpus_path;
  std::vector<PromptDesign> designs{kAllVariants.begin(), kAllVariants.end()};
  std::vector<int> batch_sizes{kStandardBatchSizes.begin(), kStandardBatchSizes.end()};
  ModelConfig model;
  int session_count = kDefaultSessionCount;
  MeterConfig meter;
  double feasibility_max_time_s = 600.0;
  double reduce_threshold = 0.99;
  std::filesystem::path output_dir = "sweep-out";
  std::optional<std::filesystem::path> prompt_assets;
  // "http" or a mock spec such as "echo-gold"; part of the resume key.
  std::string transport = "http";

  void validate() const;
  /// Content hash over every field that changes measured results. The output
  /// directory, analysis bounds and endpoint location are excluded.
  std::string hash() const;
};

/// INI document with [sweep], [model], [meter] and [prompt] sections. Relative
/// paths resolve against the file's directory. Unknown keys are errors.
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct ConfigTiming {
  std::string config;  // "P2/b20"
  std::string started_at;
  std::string finished_at;
  double wall_s = 0.0;
};

struct Manifest {
  std::string config_hash;
  std::string harness_version = kHarnessVersion;
  std::string meter_mode;
  std::string created_at;
  std::vector<ConfigTiming> timings;
};

struct SweepResult {
  std::vector<RunRecord> records;  // (design, batch_size) order
  Manifest manifest;
};

struct SweepContext {
  ModelTransport& transport;
  const Clock& clock;
  EnergyMeter& meter;
  const PromptRenderer& renderer;
  // Wall-clock stamps for the manifest; defaults to UTC ISO-8601.
  std::function<std::string()> timestamp;
  // Stop after this many newly executed configurations (partial result).
  std::optional<std::size_t> max_new_configs;
  // Called after each newly executed configuration is persisted.
  std::function<void(const RunRecord&)> on_record;
};

/// Loads the configured corpus and keeps coded utterances only.
Corpus load_sweep_corpus(const SweepConfig& config);

/// Runs every (design, batch_size) configuration not yet recorded in
/// output_dir, in lexicographic order, appending each record to runs.jsonl
/// as soon as it completes. Throws ResumeConflict when output_dir belongs to
/// a different configuration.
SweepResult run_sweep(const SweepConfig& config, const Corpus& corpus, SweepContext& context);

/// Reads manifest.json and runs.jsonl back from a sweep directory.
SweepResult load_sweep_result(const std::filesystem::path& dir);

std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(const std::string& line);

}  // namespace dialogsweep

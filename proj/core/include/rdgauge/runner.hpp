#pragma once

// Runs planned encodes against external binaries and records the outcomes.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdgauge/encode_plan.hpp"
#include "rdgauge/quality.hpp"
#include "rdgauge/store.hpp"

namespace rdgauge {

struct RunnerConfig {
  std::filesystem::path bin_dir;   // empty: PATH lookup
  std::filesystem::path work_dir = "rdgauge-work";
  unsigned jobs = 0;               // 0: hardware concurrency
  bool timing_strict = false;      // at most one encode at a time
  bool force = false;              // re-run keys already in the store
  bool measure_quality = true;
  bool keep_outputs = true;
  MetricTool metric;

  // Reads RDGAUGE_BIN_DIR and RDGAUGE_WORK_DIR when set.
  static RunnerConfig from_environment();
  std::filesystem::path binary_for(EncoderFamily family) const;
  unsigned worker_count() const;
};

enum class JobStatus { Ok, Failed, Skipped };
std::string_view to_string(JobStatus status);

struct JobOutcome {
  EncodeJob job;
  JobStatus status = JobStatus::Failed;
  std::vector<double> pass_seconds;  // one per invocation
  double wall_seconds = 0.0;
  std::int64_t output_bytes = 0;
  double measured_kbps = 0.0;
  std::optional<double> container_kbps;
  std::filesystem::path output_path;
  std::optional<QualityFields> quality;
  std::string tool_version;
  std::string error;                   // stderr tail or metric failure
  std::vector<std::string> warnings;
};

CommandPaths paths_for(const EncodeJob& job, const RunnerConfig& config);

// First line of the binary's version banner; cached per path.
std::string tool_version(const std::filesystem::path& binary, EncoderFamily family);

// Throws EnvironmentError naming the first binary a plan needs but cannot find.
void check_binaries(std::span<const EncodeJob> jobs, const RunnerConfig& config);

MetricRecord to_record(const JobOutcome& outcome);

// Runs all invocations of one job in order. A job whose key is already in the
// store is skipped unless config.force. Successful outcomes are appended to
// the store. Throws EnvironmentError for a missing encoder binary.
JobOutcome execute(const EncodeJob& job, const RunnerConfig& config, ResultsStore& store);

// Quality for an existing encode; updates outcome.quality.
void measure_quality(JobOutcome& outcome, const std::filesystem::path& source, const RunnerConfig& config);

using ProgressFn = std::function<void(const JobOutcome&)>;

// Bounded worker pool. Store appends go through a single writer thread;
// hardware-exclusive jobs never overlap each other. Outcomes are returned in
// plan order.
std::vector<JobOutcome> run_jobs(std::span<const EncodeJob> jobs, const RunnerConfig& config, ResultsStore& store,
                                 const ProgressFn& progress = {});

}  // namespace rdgauge

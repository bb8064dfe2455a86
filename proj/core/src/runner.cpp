#include "rdgauge/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "rdgauge/error.hpp"
#include "rdgauge/process.hpp"
#include "rdgauge/y4m.hpp"

namespace rdgauge {
namespace {

std::string sanitize(std::string_view s) {
  std::string out;
  for (unsigned char c : s) out.push_back(std::isalnum(c) || c == '.' || c == '-' ? static_cast<char>(c) : '_');
  return out;
}

std::string record_key(const MetricRecord& r) {
  return fmt::format("{}|{}|{}|{}|{}", r.clip_id, r.family, r.preset, r.passes, r.target_kbps);
}

void remove_passlogs(const std::filesystem::path& prefix) {
  std::error_code ec;
  const auto dir = prefix.parent_path();
  const auto stem = prefix.filename().string();
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.path().filename().string().rfind(stem, 0) == 0) std::filesystem::remove(entry.path(), ec);
}

// Encodes (all invocations) and, when configured, measures quality. Never
// touches the store.
JobOutcome encode_one(const EncodeJob& job, const RunnerConfig& config, const ClipInfo& clip) {
  JobOutcome out;
  out.job = job;
  const auto paths = paths_for(job, config);
  out.output_path = paths.output;
  out.tool_version = tool_version(paths.binary, job.family);
  std::filesystem::create_directories(paths.output.parent_path());
  std::filesystem::remove(paths.output);

  for (const auto& argv : build_commands(job, paths)) {
    const auto r = run_process(argv);
    out.pass_seconds.push_back(r.wall_seconds);
    out.wall_seconds += r.wall_seconds;
    if (!r.ok()) {
      out.status = JobStatus::Failed;
      out.error = fmt::format("pass {} exited with {}{}: {}", out.pass_seconds.size(), r.exit_code,
                              r.signal ? fmt::format(" (signal {})", r.signal) : "", r.stderr_tail);
      return out;
    }
  }
  remove_passlogs(paths.passlog);

  std::error_code ec;
  const auto size = std::filesystem::file_size(paths.output, ec);
  if (ec || size == 0) {
    out.status = JobStatus::Failed;
    out.error = fmt::format("encoder produced no output at {}", paths.output.string());
    return out;
  }
  out.output_bytes = static_cast<std::int64_t>(size);
  out.measured_kbps = 8.0 * static_cast<double>(size) / clip.duration_seconds() / 1000.0;
  out.status = JobStatus::Ok;

  if (invocation_style(job.family) == InvocationStyle::FfmpegWrapped) {
    out.container_kbps = probe_container_kbps(paths.binary, paths.output);
    if (out.container_kbps && std::abs(*out.container_kbps - out.measured_kbps) > 0.02 * *out.container_kbps)
      out.warnings.push_back(fmt::format("measured {:.1f} kb/s differs from container {:.1f} kb/s by more than 2%",
                                         out.measured_kbps, *out.container_kbps));
  }
  if (config.measure_quality) {
    try {
      out.quality = measure_quality(paths.output, job.input, config.metric, config.work_dir / "vmaf", clip.frame_count);
    } catch (const DataError& e) {
      out.warnings.push_back(fmt::format("quality not measured: {}", e.what()));
    }
  }
  if (!config.keep_outputs) std::filesystem::remove(paths.output, ec);
  return out;
}

// Single consumer of appended records.
class RecordSink {
 public:
  explicit RecordSink(ResultsStore& store) : store_(store), worker_([this] { loop(); }) {}
  ~RecordSink() {
    {
      std::lock_guard lock(mu_);
      done_ = true;
    }
    cv_.notify_one();
  }
  RecordSink(const RecordSink&) = delete;
  RecordSink& operator=(const RecordSink&) = delete;

  void push(MetricRecord r) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(r));
    }
    cv_.notify_one();
  }
  std::vector<std::string> errors() {
    std::lock_guard lock(mu_);
    return errors_;
  }

 private:
  void loop() {
    std::unique_lock lock(mu_);
    while (true) {
      cv_.wait(lock, [&] { return done_ || !queue_.empty(); });
      while (!queue_.empty()) {
        auto r = std::move(queue_.front());
        queue_.pop_front();
        lock.unlock();
        std::string err;
        try {
          store_.append(r);
        } catch (const std::exception& e) {
          err = e.what();
        }
        lock.lock();
        if (!err.empty()) errors_.push_back(err);
      }
      if (done_) return;
    }
  }

  ResultsStore& store_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<MetricRecord> queue_;
  std::vector<std::string> errors_;
  bool done_ = false;
  std::jthread worker_;  // last member: joins before the rest is destroyed
};

}  // namespace

RunnerConfig RunnerConfig::from_environment() {
  RunnerConfig c;
  if (const char* b = std::getenv("RDGAUGE_BIN_DIR"); b && *b) c.bin_dir = b;
  if (const char* w = std::getenv("RDGAUGE_WORK_DIR"); w && *w) c.work_dir = w;
  if (!c.bin_dir.empty()) {
    c.metric.ffmpeg = c.bin_dir / "ffmpeg";
    c.metric.vmaf = c.bin_dir / "vmaf";
  }
  return c;
}

std::filesystem::path RunnerConfig::binary_for(EncoderFamily family) const {
  return EncoderSpec::defaults(family, bin_dir).binary_path;
}

unsigned RunnerConfig::worker_count() const {
  if (timing_strict) return 1;
  return jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
}

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Ok: return "ok";
    case JobStatus::Failed: return "failed";
    case JobStatus::Skipped: return "skipped";
  }
  return "?";
}

CommandPaths paths_for(const EncodeJob& job, const RunnerConfig& config) {
  const auto dir = config.work_dir / std::string(to_string(job.family));
  const auto stem = fmt::format("{}_{}_{}p_{}k", sanitize(job.clip_id), sanitize(job.config_label()), job.passes,
                                job.target_kbps);
  const char* ext = invocation_style(job.family) == InvocationStyle::NativeApp ? ".ivf" : ".mp4";
  return {config.binary_for(job.family), dir / (stem + ext), dir / (stem + ".passlog")};
}

std::string tool_version(const std::filesystem::path& binary, EncoderFamily family) {
  static std::mutex mu;
  static std::map<std::string, std::string> cache;
  std::lock_guard lock(mu);
  const auto key = binary.string();
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  std::string version = "unknown";
  try {
    const bool native = invocation_style(family) == InvocationStyle::NativeApp;
    const auto r = run_process({key, native ? "--version" : "-version"}, {.capture_stdout = true});
    const std::string text = r.stdout_text.empty() ? r.stderr_tail : r.stdout_text;
    auto nl = text.find('\n');
    if (!text.empty()) version = text.substr(0, nl);
  } catch (const EnvironmentError&) {
  }
  cache[key] = version;
  return version;
}

void check_binaries(std::span<const EncodeJob> jobs, const RunnerConfig& config) {
  std::set<EncoderFamily> families;
  for (const auto& j : jobs) families.insert(j.family);
  for (auto f : families) {
    const auto bin = config.binary_for(f);
    if (!resolve_executable(bin))
      throw EnvironmentError(fmt::format("{} binary not found: {}", to_string(f), bin.string()));
  }
  if (config.measure_quality && !jobs.empty() && !resolve_executable(config.metric.primary_binary()))
    throw EnvironmentError(fmt::format("metric tool not found: {}", config.metric.primary_binary().string()));
}

MetricRecord to_record(const JobOutcome& o) {
  MetricRecord r;
  r.clip_id = o.job.clip_id;
  r.family = std::string(to_string(o.job.family));
  r.preset = o.job.config_label();
  r.passes = o.job.passes;
  r.target_kbps = o.job.target_kbps;
  r.measured_kbps = o.measured_kbps;
  if (o.quality) {
    r.vmaf = o.quality->vmaf_mean;
    r.psnr_y = o.quality->psnr_y;
  }
  r.encode_seconds = o.wall_seconds;
  r.output_bytes = o.output_bytes;
  r.tool_version = o.tool_version;
  r.created_at = now_timestamp();
  return r;
}

JobOutcome execute(const EncodeJob& job, const RunnerConfig& config, ResultsStore& store) {
  const std::span<const EncodeJob> one(&job, 1);
  auto cfg = config;
  cfg.measure_quality = false;  // the metric tool is only required when used
  check_binaries(one, cfg);
  if (!config.force) {
    const auto key = job.key();
    for (const auto& r : store.load())
      if (record_key(r) == key) {
        JobOutcome skipped;
        skipped.job = job;
        skipped.status = JobStatus::Skipped;
        return skipped;
      }
  }
  const auto clip = probe_clip(job.input);
  auto outcome = encode_one(job, config, clip);
  if (outcome.status == JobStatus::Ok) store.append(to_record(outcome));
  return outcome;
}

void measure_quality(JobOutcome& outcome, const std::filesystem::path& source, const RunnerConfig& config) {
  const auto clip = probe_clip(source);
  outcome.quality = measure_quality(outcome.output_path, source, config.metric, config.work_dir / "vmaf",
                                    clip.frame_count);
}

std::vector<JobOutcome> run_jobs(std::span<const EncodeJob> jobs, const RunnerConfig& config, ResultsStore& store,
                                 const ProgressFn& progress) {
  check_binaries(jobs, config);

  std::set<std::string> completed;
  if (!config.force)
    for (const auto& r : store.load()) completed.insert(record_key(r));

  std::map<std::filesystem::path, ClipInfo> clips;
  for (const auto& j : jobs)
    if (!completed.count(j.key()) && !clips.count(j.input)) clips.emplace(j.input, probe_clip(j.input));

  std::vector<JobOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex exclusive_mu, progress_mu;
  {
    RecordSink sink(store);
    auto worker = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        const auto& job = jobs[i];
        JobOutcome out;
        out.job = job;
        if (completed.count(job.key())) {
          out.status = JobStatus::Skipped;
        } else {
          try {
            std::unique_lock gpu(exclusive_mu, std::defer_lock);
            if (job.hardware_exclusive()) gpu.lock();
            out = encode_one(job, config, clips.at(job.input));
          } catch (const std::exception& e) {
            out.status = JobStatus::Failed;
            out.error = e.what();
          }
        }
        if (out.status == JobStatus::Ok) sink.push(to_record(out));
        if (progress) {
          std::lock_guard lock(progress_mu);
          progress(out);
        }
        outcomes[i] = std::move(out);
      }
    };
    const unsigned n = std::min<std::size_t>(config.worker_count(), std::max<std::size_t>(jobs.size(), 1));
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  return outcomes;
}

}  // namespace rdgauge

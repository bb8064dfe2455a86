#include "rdgauge/encode_plan.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "rdgauge/error.hpp"

namespace rdgauge {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

void check_passes(const EncodeJob& job) {
  if (job.passes != 1 && job.passes != 2)
    throw PlanError(fmt::format("{} does not support {}-pass encoding", to_string(job.family), job.passes));
  if (job.target_kbps <= 0) throw PlanError(fmt::format("target bitrate must be positive, got {}", job.target_kbps));
}

void check_preset(EncoderFamily family, const std::string& preset) {
  const auto& vocab = preset_vocabulary(family);
  if (std::find(vocab.begin(), vocab.end(), preset) == vocab.end())
    throw PlanError(fmt::format("unknown preset '{}' for {}", preset, to_string(family)));
}

std::string kbps(int v) { return fmt::format("{}k", v); }

// Options shared by every ffmpeg-wrapped family, up to and including the codec.
std::vector<std::string> ffmpeg_rate_args(const EncodeJob& job, const CommandPaths& paths, std::string_view codec) {
  const std::string keyint = std::to_string(job.keyint_frames);
  return {paths.binary.string(), "-y", "-i", job.input.string(), "-g", keyint, "-keyint_min", keyint,
          "-b:v", kbps(job.target_kbps), "-maxrate", kbps(job.maxrate_kbps()), "-bufsize",
          kbps(job.bufsize_kbps()), "-c:v", std::string(codec)};
}

std::vector<std::string> x26x_command(const EncodeJob& job, int invocation, const CommandPaths& paths) {
  const bool is264 = job.family == EncoderFamily::X264;
  auto argv = ffmpeg_rate_args(job, paths, is264 ? "libx264" : "libx265");
  argv.insert(argv.end(), {"-threads", std::to_string(job.threads), "-preset", job.preset, "-tune", "psnr"});
  if (job.passes == 2)
    argv.insert(argv.end(), {"-pass", std::to_string(invocation), "-passlogfile", paths.passlog.string()});
  argv.insert(argv.end(), {is264 ? "-x264-params" : "-x265-params", "scenecut=0"});
  for (const auto& p : job.extra_params)
    for (auto& tok : split_ws(p)) argv.push_back(std::move(tok));
  const bool first_of_two = job.passes == 2 && invocation == 1;
  argv.insert(argv.end(), {"-f", "mp4", first_of_two ? paths.null_sink : paths.output.string()});
  return argv;
}

std::vector<std::string> svt_command(const EncodeJob& job, const CommandPaths& paths) {
  std::vector<std::string> argv{paths.binary.string(), "-i", job.input.string(), "--keyint",
                                std::to_string(job.keyint_frames), "--tbr", std::to_string(job.target_kbps),
                                "-lp", std::to_string(job.threads), "--rc", "1"};
  if (job.passes == 2) argv.insert(argv.end(), {"--passes", "2"});
  argv.insert(argv.end(), {"--preset", job.preset});
  for (const auto& p : job.extra_params)
    for (auto& tok : split_ws(p)) argv.push_back(std::move(tok));
  argv.insert(argv.end(), {"-b", paths.output.string()});
  return argv;
}

std::vector<std::string> nvenc_command(const EncodeJob& job, const CommandPaths& paths) {
  auto argv = ffmpeg_rate_args(job, paths, "av1_nvenc");
  argv.insert(argv.end(), {"-rc", "vbr", "-threads", std::to_string(job.threads), "-preset", lower(job.preset),
                           "-no-scenecut", "1"});
  if (job.passes == 2) argv.insert(argv.end(), {"-multipass", "2"});
  for (const auto& p : job.extra_params)
    for (auto& tok : split_ws(p)) argv.push_back(std::move(tok));
  argv.push_back(paths.output.string());
  return argv;
}

EncodeJob make_job(const ClipRef& clip, EncoderFamily family, std::string preset, int passes, int tbr,
                   const JobOverrides& o) {
  EncodeJob job;
  job.clip_id = clip.id;
  job.input = clip.path;
  job.family = family;
  job.preset = std::move(preset);
  job.passes = passes;
  job.target_kbps = tbr;
  job.keyint_frames = o.keyint_frames;
  job.maxrate_factor = o.maxrate_factor;
  job.bufsize_factor = o.bufsize_factor;
  job.threads = o.threads;
  return job;
}

}  // namespace

std::string_view to_string(EncoderFamily family) {
  switch (family) {
    case EncoderFamily::X264: return "X264";
    case EncoderFamily::X265: return "X265";
    case EncoderFamily::SVT_AV1: return "SVT_AV1";
    case EncoderFamily::NVENC_AV1: return "NVENC_AV1";
  }
  return "?";
}

std::optional<EncoderFamily> parse_family(std::string_view text) {
  std::string t = lower(text);
  std::erase_if(t, [](char c) { return c == '-' || c == '_'; });
  if (t == "x264") return EncoderFamily::X264;
  if (t == "x265") return EncoderFamily::X265;
  if (t == "svtav1") return EncoderFamily::SVT_AV1;
  if (t == "nvencav1" || t == "nvenc") return EncoderFamily::NVENC_AV1;
  return std::nullopt;
}

const std::vector<std::string>& preset_vocabulary(EncoderFamily family) {
  static const std::vector<std::string> x26x{"veryslow", "slow", "medium", "fast", "veryfast", "ultrafast"};
  static const std::vector<std::string> svt{"2", "4", "6", "8", "10", "12"};
  static const std::vector<std::string> nvenc{"P1", "P3", "P4", "P5", "P7"};
  switch (family) {
    case EncoderFamily::X264:
    case EncoderFamily::X265: return x26x;
    case EncoderFamily::SVT_AV1: return svt;
    case EncoderFamily::NVENC_AV1: return nvenc;
  }
  return x26x;
}

InvocationStyle invocation_style(EncoderFamily family) {
  return family == EncoderFamily::SVT_AV1 ? InvocationStyle::NativeApp : InvocationStyle::FfmpegWrapped;
}

EncoderSpec EncoderSpec::defaults(EncoderFamily family, const std::filesystem::path& bin_dir) {
  EncoderSpec spec;
  spec.family = family;
  spec.invocation_style = rdgauge::invocation_style(family);
  const char* exe = spec.invocation_style == InvocationStyle::NativeApp ? "SvtAv1EncApp" : "ffmpeg";
  spec.binary_path = bin_dir.empty() ? std::filesystem::path(exe) : bin_dir / exe;
  spec.presets = preset_vocabulary(family);
  return spec;
}

const std::vector<int>& default_ladder() {
  static const std::vector<int> ladder{500, 1000, 2000, 3000, 4000, 6000, 8000, 10000, 12000, 14000, 16000, 20000};
  return ladder;
}

const std::vector<int>& default_toolsweep_ladder() {
  static const std::vector<int> ladder{500, 1000, 2000, 3000, 4000, 5000, 6000, 8000, 10000};
  return ladder;
}

int EncodeJob::maxrate_kbps() const { return static_cast<int>(std::lround(target_kbps * maxrate_factor)); }
int EncodeJob::bufsize_kbps() const { return static_cast<int>(std::lround(target_kbps * bufsize_factor)); }

std::string EncodeJob::config_label() const {
  std::string label = preset;
  for (const auto& p : extra_params) label += " " + p;
  return label;
}

std::string EncodeJob::key() const {
  return fmt::format("{}|{}|{}|{}|{}", clip_id, to_string(family), config_label(), passes, target_kbps);
}

std::vector<EncodeJob> plan_matrix(std::span<const ClipRef> clips, std::span<const EncoderSpec> specs,
                                   std::span<const int> ladder, std::span<const int> pass_modes,
                                   const JobOverrides& overrides) {
  if (ladder.empty()) throw PlanError("bitrate ladder is empty");
  if (pass_modes.empty()) throw PlanError("no pass modes requested");
  for (int tbr : ladder)
    if (tbr <= 0) throw PlanError(fmt::format("ladder rung {} is not positive", tbr));
  for (int p : pass_modes)
    if (p != 1 && p != 2) throw PlanError(fmt::format("unsupported pass mode {}", p));
  for (const auto& spec : specs)
    for (const auto& preset : spec.presets) check_preset(spec.family, preset);

  std::vector<EncodeJob> jobs;
  std::size_t presets = 0;
  for (const auto& s : specs) presets += s.presets.size();
  jobs.reserve(clips.size() * presets * pass_modes.size() * ladder.size());
  for (const auto& clip : clips)
    for (const auto& spec : specs)
      for (const auto& preset : spec.presets)
        for (int passes : pass_modes)
          for (int tbr : ladder) jobs.push_back(make_job(clip, spec.family, preset, passes, tbr, overrides));
  return jobs;
}

std::vector<EncodeJob> plan_toolsweep(const ClipRef& clip, std::span<const std::string> toggles,
                                      std::span<const int> ladder, EncoderFamily family, std::string preset,
                                      const JobOverrides& overrides) {
  if (ladder.empty()) throw PlanError("bitrate ladder is empty");
  std::set<std::string> seen;
  for (const auto& t : toggles) {
    if (split_ws(t).empty()) throw PlanError("empty toggle string");
    if (!seen.insert(t).second) throw PlanError(fmt::format("duplicate toggle '{}'", t));
  }
  check_preset(family, preset);

  std::vector<EncodeJob> jobs;
  jobs.reserve((toggles.size() + 1) * ladder.size());
  for (int tbr : ladder) jobs.push_back(make_job(clip, family, preset, 1, tbr, overrides));
  for (const auto& t : toggles)
    for (int tbr : ladder) {
      auto job = make_job(clip, family, preset, 1, tbr, overrides);
      job.extra_params.push_back(t);
      jobs.push_back(std::move(job));
    }
  return jobs;
}

int invocation_count(const EncodeJob& job) {
  check_passes(job);
  const bool chained = job.family == EncoderFamily::X264 || job.family == EncoderFamily::X265;
  return chained ? job.passes : 1;
}

std::vector<std::string> build_command(const EncodeJob& job, int invocation, const CommandPaths& paths) {
  const int count = invocation_count(job);
  if (invocation < 1 || invocation > count)
    throw PlanError(fmt::format("invocation {} out of range 1..{} for {}", invocation, count, job.key()));
  switch (job.family) {
    case EncoderFamily::X264:
    case EncoderFamily::X265: return x26x_command(job, invocation, paths);
    case EncoderFamily::SVT_AV1: return svt_command(job, paths);
    case EncoderFamily::NVENC_AV1: return nvenc_command(job, paths);
  }
  throw PlanError("unknown encoder family");
}

std::vector<std::vector<std::string>> build_commands(const EncodeJob& job, const CommandPaths& paths) {
  std::vector<std::vector<std::string>> out;
  for (int i = 1, n = invocation_count(job); i <= n; ++i) out.push_back(build_command(job, i, paths));
  return out;
}

std::string join_command(std::span<const std::string> argv) {
  std::string out;
  for (const auto& a : argv) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

}  // namespace rdgauge

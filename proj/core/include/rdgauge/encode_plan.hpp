#pragma once

// Benchmark matrix planning and per-encoder command-line construction.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdgauge {

enum class EncoderFamily { X264, X265, SVT_AV1, NVENC_AV1 };
enum class InvocationStyle { FfmpegWrapped, NativeApp };

std::string_view to_string(EncoderFamily family);
// Accepts the canonical names and common spellings ("x264", "svt-av1", ...).
std::optional<EncoderFamily> parse_family(std::string_view text);

// Presets evaluated per family, slowest first.
const std::vector<std::string>& preset_vocabulary(EncoderFamily family);
InvocationStyle invocation_style(EncoderFamily family);

struct EncoderSpec {
  EncoderFamily family = EncoderFamily::X264;
  InvocationStyle invocation_style = InvocationStyle::FfmpegWrapped;
  std::filesystem::path binary_path;
  std::vector<std::string> presets;  // subset of preset_vocabulary(family) to plan

  // Full vocabulary, binary resolved as `ffmpeg` or `SvtAv1EncApp` under bin_dir
  // (or bare, for PATH lookup, when bin_dir is empty).
  static EncoderSpec defaults(EncoderFamily family, const std::filesystem::path& bin_dir = {});
};

inline constexpr int kDefaultKeyint = 131;
inline constexpr double kDefaultMaxrateFactor = 1.2;
inline constexpr double kDefaultBufsizeFactor = 2.0;

// kb/s
const std::vector<int>& default_ladder();
const std::vector<int>& default_toolsweep_ladder();

struct ClipRef {
  std::string id;
  std::filesystem::path path;
};

struct EncodeJob {
  std::string clip_id;
  std::filesystem::path input;
  EncoderFamily family = EncoderFamily::X264;
  std::string preset;
  int passes = 1;
  int target_kbps = 0;
  int keyint_frames = kDefaultKeyint;
  double maxrate_factor = kDefaultMaxrateFactor;
  double bufsize_factor = kDefaultBufsizeFactor;
  int threads = 1;
  std::vector<std::string> extra_params;  // raw options, e.g. "--enable-tf 0"

  int maxrate_kbps() const;
  int bufsize_kbps() const;
  // Preset plus any extra options; this is the "preset" stored with results.
  std::string config_label() const;
  // "clip|family|label|passes|tbr"
  std::string key() const;
  bool hardware_exclusive() const { return family == EncoderFamily::NVENC_AV1; }
};

struct JobOverrides {
  double maxrate_factor = kDefaultMaxrateFactor;
  double bufsize_factor = kDefaultBufsizeFactor;
  int keyint_frames = kDefaultKeyint;
  int threads = 1;
};

// Cartesian product ordered by (clip, family, preset, passes, bitrate).
std::vector<EncodeJob> plan_matrix(std::span<const ClipRef> clips, std::span<const EncoderSpec> specs,
                                   std::span<const int> ladder, std::span<const int> pass_modes,
                                   const JobOverrides& overrides = {});

// One default configuration plus one per toggle, each across the ladder, single pass.
std::vector<EncodeJob> plan_toolsweep(const ClipRef& clip, std::span<const std::string> toggles,
                                      std::span<const int> ladder = default_toolsweep_ladder(),
                                      EncoderFamily family = EncoderFamily::SVT_AV1,
                                      std::string preset = "10", const JobOverrides& overrides = {});

struct CommandPaths {
  std::filesystem::path binary;
  std::filesystem::path output;
  std::filesystem::path passlog;  // prefix handed to -passlogfile
  std::string null_sink = "/dev/null";
};

// Number of process invocations a job needs. Only ffmpeg-wrapped x264/x265
// 2-pass encodes are chained; SVT-AV1 and NVENC run their passes internally.
int invocation_count(const EncodeJob& job);

// Argument vector (argv[0] is the binary) for invocation 1..invocation_count(job).
std::vector<std::string> build_command(const EncodeJob& job, int invocation, const CommandPaths& paths);
std::vector<std::vector<std::string>> build_commands(const EncodeJob& job, const CommandPaths& paths);

// Space-joined argv for logs and golden files.
std::string join_command(std::span<const std::string> argv);

}  // namespace rdgauge

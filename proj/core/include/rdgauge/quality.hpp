#pragma once

// Objective quality through an external VMAF tool. Both supported tool styles
// write libvmaf's JSON log, which is what gets parsed.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rdgauge {

struct QualityFields {
  double vmaf_mean = 0.0;
  double psnr_y = 0.0;
  std::size_t frames = 0;
};

// Reads pooled_metrics.vmaf.mean and pooled_metrics.psnr_y.mean. Throws
// ParseError when the JSON is malformed or the pooled section is missing.
QualityFields parse_vmaf_log(std::string_view json_text);

enum class MetricToolStyle {
  FfmpegLibvmaf,  // ffmpeg -lavfi libvmaf
  VmafCli,        // standalone `vmaf`, distorted stream decoded to Y4M first
};

struct MetricTool {
  MetricToolStyle style = MetricToolStyle::FfmpegLibvmaf;
  std::filesystem::path ffmpeg = "ffmpeg";
  std::filesystem::path vmaf = "vmaf";
  int threads = 1;

  // The binary the style depends on most (checked before a run).
  const std::filesystem::path& primary_binary() const { return style == MetricToolStyle::VmafCli ? vmaf : ffmpeg; }
};

std::vector<std::string> build_metric_command(const MetricTool& tool, const std::filesystem::path& distorted,
                                              const std::filesystem::path& reference,
                                              const std::filesystem::path& log_path);

// Runs the tool and parses its log. Throws MetricError when the number of
// scored frames differs from expected_frames (when given) or the tool fails.
QualityFields measure_quality(const std::filesystem::path& distorted, const std::filesystem::path& reference,
                              const MetricTool& tool, const std::filesystem::path& scratch_dir,
                              std::optional<std::size_t> expected_frames = std::nullopt);

// Container-level bitrate reported by `ffmpeg -i` ("bitrate: N kb/s").
std::optional<double> parse_container_kbps(std::string_view ffmpeg_banner);
std::optional<double> probe_container_kbps(const std::filesystem::path& ffmpeg, const std::filesystem::path& file);

}  // namespace rdgauge

#include "rdgauge/quality.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "rdgauge/error.hpp"
#include "rdgauge/process.hpp"
#include "rdgauge/y4m.hpp"

namespace rdgauge {
namespace {

// Filter-graph option values need ':' and '\' escaped.
std::string escape_filter_value(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ':' || c == '\\' || c == '\'') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

double pooled_mean(const nlohmann::json& pooled, const char* metric) {
  auto it = pooled.find(metric);
  if (it == pooled.end() || !it->is_object() || !it->contains("mean") || !(*it)["mean"].is_number())
    throw ParseError(fmt::format("vmaf log: pooled '{}' mean missing", metric));
  return (*it)["mean"].get<double>();
}

}  // namespace

QualityFields parse_vmaf_log(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("vmaf log: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("pooled_metrics") || !j["pooled_metrics"].is_object())
    throw ParseError("vmaf log: no pooled_metrics section");
  const auto& pooled = j["pooled_metrics"];
  QualityFields q;
  q.vmaf_mean = pooled_mean(pooled, "vmaf");
  q.psnr_y = pooled_mean(pooled, "psnr_y");
  if (auto it = j.find("frames"); it != j.end() && it->is_array()) q.frames = it->size();
  return q;
}

std::vector<std::string> build_metric_command(const MetricTool& tool, const std::filesystem::path& distorted,
                                              const std::filesystem::path& reference,
                                              const std::filesystem::path& log_path) {
  if (tool.style == MetricToolStyle::FfmpegLibvmaf) {
    const std::string graph =
        fmt::format("[0:v][1:v]libvmaf=log_fmt=json:log_path={}:feature=name=psnr:n_threads={}",
                    escape_filter_value(log_path.string()), tool.threads);
    return {tool.ffmpeg.string(), "-hide_banner", "-nostdin", "-i", distorted.string(), "-i", reference.string(),
            "-lavfi", graph, "-f", "null", "-"};
  }
  return {tool.vmaf.string(), "-r", reference.string(), "-d", distorted.string(), "--json", "-o",
          log_path.string(), "--feature", "psnr", "--threads", std::to_string(tool.threads)};
}

QualityFields measure_quality(const std::filesystem::path& distorted, const std::filesystem::path& reference,
                              const MetricTool& tool, const std::filesystem::path& scratch_dir,
                              std::optional<std::size_t> expected_frames) {
  std::filesystem::create_directories(scratch_dir);
  const auto stem = distorted.stem().string();
  const auto log_path = scratch_dir / (stem + ".vmaf.json");
  std::filesystem::path scored = distorted;
  std::filesystem::path decoded;

  if (tool.style == MetricToolStyle::VmafCli) {
    // The standalone tool only reads raw video; decode to the source's format.
    const auto ref = probe_clip(reference);
    decoded = scratch_dir / (stem + ".decoded.y4m");
    std::vector<std::string> argv{tool.ffmpeg.string(), "-hide_banner", "-nostdin", "-y", "-i", distorted.string(),
                                  "-pix_fmt", ref.header.bit_depth > 8 ? "yuv420p10le" : "yuv420p",
                                  "-strict", "-1", "-f", "yuv4mpegpipe", decoded.string()};
    const auto dec = run_process(argv);
    if (!dec.ok()) throw MetricError(fmt::format("decoding {} failed: {}", distorted.string(), dec.stderr_tail));
    scored = decoded;
  }

  const auto result = run_process(build_metric_command(tool, scored, reference, log_path));
  if (!decoded.empty()) std::filesystem::remove(decoded);
  if (!result.ok())
    throw MetricError(fmt::format("metric tool exited with {}: {}", result.exit_code, result.stderr_tail));

  std::ifstream in(log_path);
  if (!in) throw MetricError(fmt::format("metric tool wrote no log at {}", log_path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  const auto q = parse_vmaf_log(buf.str());
  if (expected_frames && q.frames != *expected_frames)
    throw MetricError(fmt::format("frame count mismatch: source has {}, metric scored {}", *expected_frames, q.frames));
  return q;
}

std::optional<double> parse_container_kbps(std::string_view text) {
  constexpr std::string_view tag = "bitrate: ";
  auto pos = text.find(tag);
  while (pos != std::string_view::npos) {
    auto start = pos + tag.size();
    auto end = text.find(" kb/s", start);
    if (end != std::string_view::npos) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + end, v);
      if (ec == std::errc{} && ptr == text.data() + end) return v;
    }
    pos = text.find(tag, start);
  }
  return std::nullopt;
}

std::optional<double> probe_container_kbps(const std::filesystem::path& ffmpeg, const std::filesystem::path& file) {
  // Exits nonzero because no output is given; only the banner matters.
  const auto r = run_process({ffmpeg.string(), "-hide_banner", "-nostdin", "-i", file.string()},
                             {.capture_stdout = false, .stderr_tail_bytes = 16384});
  return parse_container_kbps(r.stderr_tail);
}

}  // namespace rdgauge

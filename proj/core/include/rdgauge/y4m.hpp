#pragma once

// YUV4MPEG2 reading and writing for progressive 4:2:0 at 8 or 10 bits.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdgauge {

struct Rational {
  int num = 0;
  int den = 0;
  friend bool operator==(const Rational&, const Rational&) = default;
};

enum class Chroma { C420, C420p10 };

struct VideoHeader {
  int width = 0;
  int height = 0;
  Rational fps{24, 1};
  Chroma chroma = Chroma::C420;
  int bit_depth = 8;
  char interlacing = 'p';
  Rational pixel_aspect{0, 0};  // 0:0 is "unknown" in Y4M
  // Tags we do not understand. Kept for diagnostics, not re-emitted.
  std::vector<std::string> ignored_tags;

  int chroma_width() const { return width / 2; }
  int chroma_height() const { return height / 2; }
  std::size_t sample_count() const;
  std::size_t bytes_per_sample() const { return bit_depth > 8 ? 2 : 1; }
  std::size_t frame_payload_bytes() const { return sample_count() * bytes_per_sample(); }
  std::uint16_t max_sample() const { return static_cast<std::uint16_t>((1u << bit_depth) - 1); }
  double frame_rate() const { return static_cast<double>(fps.num) / fps.den; }

  // Compares stream parameters; ignored_tags do not participate.
  bool same_format(const VideoHeader& other) const;
};

struct Plane {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> samples;

  Plane() = default;
  Plane(int w, int h, std::uint16_t fill = 0)
      : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {}

  std::uint16_t& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint16_t at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const Plane&, const Plane&) = default;
};

struct Frame {
  Plane y;
  Plane u;
  Plane v;

  static Frame filled(const VideoHeader& header, std::uint16_t luma, std::uint16_t chroma);
  friend bool operator==(const Frame&, const Frame&) = default;
};

// Throws ValidationError when the header breaks an invariant.
void validate(const VideoHeader& header);
// Throws ValidationError when plane sizes or sample ranges do not match the header.
void validate(const VideoHeader& header, const Frame& frame);

VideoHeader parse_header_line(std::string_view line);
VideoHeader parse_header(std::istream& in);
std::string format_header_line(const VideoHeader& header);

// Reads one "FRAME" marker plus payload. Throws FormatError when the marker is
// missing (including at end of stream) and IncompleteFrameError on truncation.
Frame read_frame(std::istream& in, const VideoHeader& header);

// Streams a clip frame by frame.
class Y4mReader {
 public:
  explicit Y4mReader(std::istream& in);

  const VideoHeader& header() const { return header_; }
  // nullopt at a clean end of stream.
  std::optional<Frame> next();
  // Advances past one frame without decoding it; false at a clean end of stream.
  bool skip();
  std::size_t frames_read() const { return frames_; }
  std::size_t bytes_consumed() const { return bytes_; }

 private:
  bool read_marker();

  std::istream& in_;
  VideoHeader header_;
  std::size_t frames_ = 0;
  std::size_t bytes_ = 0;
};

std::size_t write_header(const VideoHeader& header, std::ostream& out);
std::size_t write_frame(const VideoHeader& header, const Frame& frame, std::ostream& out);
// Returns the number of bytes written.
std::size_t write_clip(const VideoHeader& header, std::span<const Frame> frames, std::ostream& out);

struct ClipInfo {
  VideoHeader header;
  std::size_t frame_count = 0;
  double duration_seconds() const { return frame_count / header.frame_rate(); }
};

// Header plus frame count, found by seeking over payloads.
ClipInfo probe_clip(const std::filesystem::path& path);

}  // namespace rdgauge
